#pragma once

#include <cstdio>
#include <string>

namespace recgame {

// 12 significant digits, '.' decimal separator regardless of locale.
inline std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  std::string s(buf);
  for (char& c : s)
    if (c == ',') c = '.';
  return s;
}

}  // namespace recgame
