#include "advreal/core/log.hpp"

#include <iostream>
#include <mutex>
#include <set>

namespace advreal {
namespace {

std::mutex g_mutex;
WarningSink g_sink;
std::set<std::string> g_seen;  // default sink prints each message once

}  // namespace

void set_warning_sink(WarningSink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(message);
  } else if (g_seen.insert(message).second) {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace advreal
