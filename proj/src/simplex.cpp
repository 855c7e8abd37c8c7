#include "dapp/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace dapp {

int LinearProgram::add_variable(double cost, double lower, double upper) {
  if (!std::isfinite(lower)) throw std::invalid_argument("variables need a finite lower bound");
  if (upper < lower) throw std::invalid_argument("variable upper bound below lower bound");
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return static_cast<int>(cost_.size()) - 1;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, Sense sense, double rhs) {
  for (const auto& [j, a] : coeffs) {
    if (j < 0 || j >= num_variables()) throw std::out_of_range("row references unknown variable");
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite coefficient");
  }
  rows_.push_back({std::move(coeffs), sense, rhs});
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opt) : opt_(opt) {
    m_ = lp.num_rows();
    n_ = lp.num_variables();
    for (int j = 0; j < n_; ++j) add_col(lp.cost()[j], lp.lower()[j], lp.upper()[j]);
    std::vector<int> slack(static_cast<std::size_t>(m_), -1);
    for (int i = 0; i < m_; ++i) {
      if (lp.rows()[static_cast<std::size_t>(i)].sense != LinearProgram::Sense::EQ) slack[static_cast<std::size_t>(i)] = add_col(0, 0, kInf);
    }
    artStart_ = cols();
    for (int i = 0; i < m_; ++i) add_col(0, 0, kInf);
    N_ = cols();

    T_.assign(static_cast<std::size_t>(m_) * static_cast<std::size_t>(N_), 0.0);
    state_.assign(static_cast<std::size_t>(N_), VarState::AtLower);
    val_.assign(static_cast<std::size_t>(N_), 0.0);
    for (int j = 0; j < N_; ++j) val_[static_cast<std::size_t>(j)] = lo_[static_cast<std::size_t>(j)];
    for (int j = 0; j < n_ && j < static_cast<int>(opt.startAtUpper.size()); ++j) {
      if (opt.startAtUpper[static_cast<std::size_t>(j)] && std::isfinite(hi_[static_cast<std::size_t>(j)])) {
        state_[static_cast<std::size_t>(j)] = VarState::AtUpper;
        val_[static_cast<std::size_t>(j)] = hi_[static_cast<std::size_t>(j)];
      }
    }

    basis_.assign(static_cast<std::size_t>(m_), -1);
    xB_.assign(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i) {
      const auto& row = lp.rows()[static_cast<std::size_t>(i)];
      double* t = rowp(i);
      for (const auto& [j, a] : row.coeffs) t[j] += a;
      if (slack[static_cast<std::size_t>(i)] >= 0) {
        t[slack[static_cast<std::size_t>(i)]] = row.sense == LinearProgram::Sense::LE ? 1.0 : -1.0;
      }
      double resid = row.rhs;
      for (int j = 0; j < artStart_; ++j) resid -= t[j] * val_[static_cast<std::size_t>(j)];
      const double sigma = resid >= 0 ? 1.0 : -1.0;
      if (sigma < 0) {
        for (int j = 0; j < artStart_; ++j) t[j] = -t[j];
      }
      const int a = artStart_ + i;
      t[a] = 1.0;
      basis_[static_cast<std::size_t>(i)] = a;
      state_[static_cast<std::size_t>(a)] = VarState::Basic;
      xB_[static_cast<std::size_t>(i)] = std::abs(resid);
      rhsScale_ += std::abs(row.rhs);
    }
  }

  LpResult solve() {
    LpResult res;
    std::vector<double> phase1(static_cast<std::size_t>(N_), 0.0);
    for (int j = artStart_; j < N_; ++j) phase1[static_cast<std::size_t>(j)] = 1.0;
    LpStatus st = run_phase(phase1);
    res.iterations = iter_;
    if (st == LpStatus::IterationLimit) {
      res.status = st;
      return res;
    }
    double infeas = 0;
    for (int i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] >= artStart_) infeas += xB_[static_cast<std::size_t>(i)];
    }
    if (infeas > 1e-7 * std::max(1.0, rhsScale_)) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    for (int j = artStart_; j < N_; ++j) hi_[static_cast<std::size_t>(j)] = 0.0;
    st = run_phase(cost_);
    res.iterations = iter_;
    res.status = st;
    if (st != LpStatus::Optimal) return res;
    res.x.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) res.x[static_cast<std::size_t>(j)] = val_[static_cast<std::size_t>(j)];
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[static_cast<std::size_t>(i)];
      if (b < n_) res.x[static_cast<std::size_t>(b)] = xB_[static_cast<std::size_t>(i)];
    }
    res.objective = 0;
    for (int j = 0; j < n_; ++j) res.objective += cost_[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
    return res;
  }

 private:
  int add_col(double c, double lo, double hi) {
    cost_.push_back(c);
    lo_.push_back(lo);
    hi_.push_back(hi);
    return static_cast<int>(cost_.size()) - 1;
  }
  int cols() const { return static_cast<int>(cost_.size()); }
  double* rowp(int i) { return T_.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(N_); }

  LpStatus run_phase(const std::vector<double>& c) {
    const double tol = opt_.tolerance;
    constexpr double kPivotTol = 1e-11;
    std::vector<double> d(c);
    for (int i = 0; i < m_; ++i) {
      const double cb = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
      if (cb == 0) continue;
      const double* t = rowp(i);
      for (int j = 0; j < N_; ++j) d[static_cast<std::size_t>(j)] -= cb * t[j];
    }
    int degenerate = 0;
    while (true) {
      if (iter_ >= opt_.maxIterations) return LpStatus::IterationLimit;
      const bool bland = degenerate >= opt_.degenerateSwitch;

      int q = -1;
      double best = 0;
      for (int j = 0; j < N_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (state_[js] == VarState::Basic || hi_[js] - lo_[js] <= tol) continue;
        const double dj = d[js];
        const bool improving = (state_[js] == VarState::AtLower && dj < -tol) ||
                               (state_[js] == VarState::AtUpper && dj > tol);
        if (!improving) continue;
        if (bland) {
          q = j;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
        }
      }
      if (q < 0) return LpStatus::Optimal;
      const auto qs = static_cast<std::size_t>(q);
      const double dir = state_[qs] == VarState::AtLower ? 1.0 : -1.0;

      double tmax = hi_[qs] - lo_[qs];
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        const double a = rowp(i)[q];
        if (std::abs(a) <= kPivotTol) continue;
        const double rate = -dir * a;
        const auto bi = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
        const double x = xB_[static_cast<std::size_t>(i)];
        double lim;
        if (rate < 0) {
          lim = (x - lo_[bi]) / -rate;
        } else {
          if (!std::isfinite(hi_[bi])) continue;
          lim = (hi_[bi] - x) / rate;
        }
        if (lim < 0) lim = 0;
        if (lim < tmax - 1e-12) {
          tmax = lim;
          r = i;
        } else if (r >= 0 && lim <= tmax + 1e-12) {
          const bool better = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(r)]
                                    : std::abs(a) > std::abs(rowp(r)[q]);
          if (better) {
            tmax = std::min(tmax, lim);
            r = i;
          }
        }
      }
      if (r < 0 && !std::isfinite(tmax)) return LpStatus::Unbounded;

      const double t = tmax;
      if (t != 0) {
        for (int i = 0; i < m_; ++i) xB_[static_cast<std::size_t>(i)] -= dir * rowp(i)[q] * t;
      }
      ++iter_;
      degenerate = t <= tol ? degenerate + 1 : 0;
      if (r < 0) {
        state_[qs] = state_[qs] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
        val_[qs] = state_[qs] == VarState::AtUpper ? hi_[qs] : lo_[qs];
        continue;
      }

      const auto rs = static_cast<std::size_t>(r);
      const int leaving = basis_[rs];
      const auto ls = static_cast<std::size_t>(leaving);
      const double rateR = -dir * rowp(r)[q];
      state_[ls] = rateR < 0 ? VarState::AtLower : VarState::AtUpper;
      val_[ls] = state_[ls] == VarState::AtUpper ? hi_[ls] : lo_[ls];
      const double enteringValue = val_[qs] + dir * t;

      double* pr = rowp(r);
      const double piv = pr[q];
      for (int j = 0; j < N_; ++j) pr[j] /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* ti = rowp(i);
        const double f = ti[q];
        if (f == 0) continue;
        for (int j = 0; j < N_; ++j) ti[j] -= f * pr[j];
        ti[q] = 0;
      }
      const double fd = d[qs];
      if (fd != 0) {
        for (int j = 0; j < N_; ++j) d[static_cast<std::size_t>(j)] -= fd * pr[j];
      }
      d[qs] = 0;
      basis_[rs] = q;
      state_[qs] = VarState::Basic;
      xB_[rs] = enteringValue;
    }
  }

  const SimplexOptions& opt_;
  int m_ = 0, n_ = 0, N_ = 0, artStart_ = 0;
  std::vector<double> cost_, lo_, hi_;
  std::vector<double> T_;
  std::vector<VarState> state_;
  std::vector<double> val_;
  std::vector<int> basis_;
  std::vector<double> xB_;
  double rhsScale_ = 0;
  int iter_ = 0;
};

}  // namespace

LpResult simplex_solve(const LinearProgram& lp, const SimplexOptions& opt) {
  Tableau t(lp, opt);
  return t.solve();
}

}  // namespace dapp
