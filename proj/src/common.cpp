#include "gds/common.hpp"

#include <algorithm>

namespace gds {

namespace {

double srgb_to_linear(int channel) {
  const double c = std::clamp(channel, 0, 255) / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double kDelta = 6.0 / 29.0;
  return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                      : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

}  // namespace

Lab rgb_to_lab(int r, int g, int b) {
  const double rl = srgb_to_linear(r);
  const double gl = srgb_to_linear(g);
  const double bl = srgb_to_linear(b);

  const double x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl;
  const double y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl;
  const double z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl;

  // D65
  const double fx = lab_f(x / 0.95047);
  const double fy = lab_f(y / 1.00000);
  const double fz = lab_f(z / 1.08883);
  return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

ParseError::ParseError(const std::string& path, int line,
                       const std::string& what)
    : Error(path + ":" + (line > 0 ? std::to_string(line) : "EOF") + ": " +
            what),
      line_(line) {}

}  // namespace gds
