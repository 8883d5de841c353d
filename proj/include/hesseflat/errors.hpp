#pragma once

#include <stdexcept>
#include <string>

namespace hesseflat {

/// Base class for all library errors. `code()` is a stable machine-readable
/// tag that the CLI forwards into JSON error payloads.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ParseError : Error {
  std::size_t offset;
  ParseError(std::size_t off, const std::string& msg)
      : Error("ParseError", msg), offset(off) {}
};

struct EvalDomainError : Error {
  std::string subexpr;
  double x, y, u;
  EvalDomainError(std::string sub, double px, double py, double pu,
                  const std::string& msg)
      : Error("DomainError", msg), subexpr(std::move(sub)), x(px), y(py), u(pu) {}
};

struct NotPositiveDefinite : Error {
  double trace, det;
  double x, y;
  NotPositiveDefinite(double tr, double d, double px, double py,
                      const std::string& msg)
      : Error("NotPositiveDefinite", msg), trace(tr), det(d), x(px), y(py) {}
};

struct EmptyAdmissibleInterval : Error {
  std::string condition;  // first violated condition
  double at_u;
  EmptyAdmissibleInterval(std::string cond, double u, const std::string& msg)
      : Error("EmptyAdmissibleInterval", msg), condition(std::move(cond)), at_u(u) {}
};

struct NegativeDiscriminant : Error {
  double at_u;
  NegativeDiscriminant(double u, const std::string& msg)
      : Error("NegativeDiscriminant", msg), at_u(u) {}
};

struct PhaseSingularity : Error {
  double at_u;
  PhaseSingularity(double u, const std::string& msg)
      : Error("PhaseSingularity", msg), at_u(u) {}
};

struct MonotonicityViolation : Error {
  double at_u;
  MonotonicityViolation(double u, const std::string& msg)
      : Error("MonotonicityViolation", msg), at_u(u) {}
};

struct NotClosed : Error {
  double residual, scale;
  NotClosed(double r, double s, const std::string& msg)
      : Error("NotClosed", msg), residual(r), scale(s) {}
};

struct SingularJacobian : Error {
  int it, itheta;
  SingularJacobian(int i, int j, const std::string& msg)
      : Error("SingularJacobian", msg), it(i), itheta(j) {}
};

struct PositivityViolation : Error {
  int it, itheta;
  PositivityViolation(int i, int j, const std::string& msg)
      : Error("PositivityViolation", msg), it(i), itheta(j) {}
};

struct OutsideChart : Error {
  double x, y;
  OutsideChart(double px, double py, const std::string& msg)
      : Error("OutsideChart", msg), x(px), y(py) {}
};

struct NewtonDivergence : Error {
  double last_residual;
  NewtonDivergence(double r, const std::string& msg)
      : Error("NewtonDivergence", msg), last_residual(r) {}
};

struct NotStarShaped : Error {
  double ray_x, ray_y;  // endpoint of the offending ray
  NotStarShaped(double px, double py, const std::string& msg)
      : Error("NotStarShaped", msg), ray_x(px), ray_y(py) {}
};

struct NotRadiallySymmetric : Error {
  explicit NotRadiallySymmetric(const std::string& msg)
      : Error("NotRadiallySymmetric", msg) {}
};

struct NotFlat : Error {
  double residual;
  NotFlat(double r, const std::string& msg) : Error("NotFlat", msg), residual(r) {}
};

/// NaN/overflow and other internal numerical failures (CLI exit code 2).
struct NumericalError : Error {
  explicit NumericalError(const std::string& msg) : Error("NumericalError", msg) {}
};

}  // namespace hesseflat
