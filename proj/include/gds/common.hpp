#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gds {

using Vec3 = Eigen::Vector3d;

// CIELab triple (D65 reference white).
struct Lab {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const Lab&, const Lab&) = default;
};

// CIE76 color difference.
inline double delta_e(const Lab& x, const Lab& y) {
  const double dl = x.L - y.L;
  const double da = x.a - y.a;
  const double db = x.b - y.b;
  return std::sqrt(dl * dl + da * da + db * db);
}

Lab rgb_to_lab(int r, int g, int b);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based; 0 means end of file.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// Missing files, inconsistent datasets, invalid labelings.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gds
