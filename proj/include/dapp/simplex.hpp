#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace dapp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// min c^T x  s.t.  rows,  lower <= x <= upper.
class LinearProgram {
 public:
  enum class Sense { LE, EQ, GE };
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    Sense sense = Sense::LE;
    double rhs = 0;
  };

  int add_variable(double cost, double lower = 0.0, double upper = kInf);
  void add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<double> cost_, lower_, upper_;
  std::vector<Row> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };
std::string to_string(LpStatus s);

struct SimplexOptions {
  int maxIterations = 200000;
  double tolerance = 1e-9;
  /// Consecutive degenerate pivots after which pricing switches from
  /// Dantzig to Bland's rule (which cannot cycle).
  int degenerateSwitch = 50;
  /// Optional per-variable start at the upper bound (warm start hint).
  std::vector<bool> startAtUpper;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0;
  std::vector<double> x;
  int iterations = 0;
};

/// Dense bounded-variable primal simplex (two phases).
LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opt = {});

}  // namespace dapp
