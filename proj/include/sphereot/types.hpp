#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sphereot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error categories map to CLI exit codes: validation 2, solver 3, analysis 4.
enum class ErrorKind { validation = 2, solver = 3, analysis = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct CutLocusError : Error {
  explicit CutLocusError(const std::string& msg)
      : Error(ErrorKind::analysis, msg) {}
};

struct UnsupportedScheme : Error {
  explicit UnsupportedScheme(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct NonPositiveMetric : Error {
  explicit NonPositiveMetric(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct NonPositiveDensity : Error {
  explicit NonPositiveDensity(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct NoConvergence : Error {
  NoConvergence(int iterations_, double residual_, const std::string& msg)
      : Error(ErrorKind::solver, msg),
        iterations(iterations_),
        residual(residual_) {}
  int iterations;
  double residual;
};

struct SizeLimit : Error {
  explicit SizeLimit(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct Infeasible : Error {
  explicit Infeasible(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct DegenerateNeighborhood : Error {
  explicit DegenerateNeighborhood(const std::string& msg)
      : Error(ErrorKind::analysis, msg) {}
};

struct InvalidDensityBounds : Error {
  explicit InvalidDensityBounds(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct NodeSetMismatch : Error {
  explicit NodeSetMismatch(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& msg)
      : Error(ErrorKind::validation, msg) {}
};

}  // namespace sphereot
