#include "sheat/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

namespace sheat {

spdlog::logger& log() {
  static std::shared_ptr<spdlog::logger> lg = [] {
    auto l = spdlog::stderr_color_mt("sheat");
    l->set_level(spdlog::level::warn);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *lg;
}

void set_verbosity(int level) {
  switch (level) {
    case 0: log().set_level(spdlog::level::warn); break;
    case 1: log().set_level(spdlog::level::info); break;
    default: log().set_level(spdlog::level::debug); break;
  }
}

}  // namespace sheat
