#pragma once

#include <stdexcept>
#include <string>

namespace she {

// configuration file problems; maps to exit code 1
struct config_error : std::runtime_error {
  int line = 0;
  config_error(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg
                                       : msg),
        line(line_no) {}
};

// parameter regimes deliberately out of scope; maps to exit code 2
struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace she
