#include "spinres/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spinres/errors.hpp"

namespace spinres::fitkit {

namespace {

constexpr double kLambdaInit = 1e-3;
constexpr double kLambdaMax = 1e12;
constexpr double kRelCostTol = 1e-12;
constexpr double kGradTol = 1e-10;
constexpr double kStepTol = 1e-10;
constexpr int kMaxIterations = 500;
constexpr double kRelDiffStep = 1e-6;

// Solves a (n x n, row-major) * x = b by Gaussian elimination with partial
// pivoting.  Returns false on a (near-)zero pivot.
bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                  std::vector<double>& x) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[piv * n + col])) piv = row;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int k = col; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (int row = col + 1; row < n; ++row) {
      const double f = a[row * n + col] * inv;
      if (f == 0) continue;
      for (int k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
      b[row] -= f * b[col];
    }
  }
  x.assign(static_cast<std::size_t>(n), 0.0);
  for (int row = n - 1; row >= 0; --row) {
    double s = b[row];
    for (int k = row + 1; k < n; ++k) s -= a[row * n + k] * x[k];
    x[row] = s / a[row * n + row];
  }
  return true;
}

// In-place Gauss-Jordan inverse with partial pivoting.
bool invert_matrix(std::vector<double> a, int n, std::vector<double>& inv) {
  inv.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[row * n + col]) > std::abs(a[piv * n + col])) piv = row;
    }
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[piv * n + k], a[col * n + k]);
        std::swap(inv[piv * n + k], inv[col * n + k]);
      }
    }
    const double d = 1.0 / a[col * n + col];
    for (int k = 0; k < n; ++k) {
      a[col * n + k] *= d;
      inv[col * n + k] *= d;
    }
    for (int row = 0; row < n; ++row) {
      if (row == col) continue;
      const double f = a[row * n + col];
      if (f == 0) continue;
      for (int k = 0; k < n; ++k) {
        a[row * n + k] -= f * a[col * n + k];
        inv[row * n + k] -= f * inv[col * n + k];
      }
    }
  }
  return true;
}

class Engine {
 public:
  explicit Engine(const FitProblem& prob) : prob_(prob) {
    for (std::size_t i = 0; i < prob.params.size(); ++i) {
      if (!prob.params[i].fixed) free_idx_.push_back(static_cast<int>(i));
    }
    theta_full_.resize(prob.params.size());
    for (std::size_t i = 0; i < prob.params.size(); ++i) {
      theta_full_[i] = prob.params[i].value;
    }
    n_res_ = prob.complex_data ? 2 * prob.x.size() : prob.x.size();
  }

  int n_free() const { return static_cast<int>(free_idx_.size()); }
  std::size_t n_residuals() const { return n_res_; }
  const std::vector<int>& free_idx() const { return free_idx_; }

  std::vector<double> initial_free() const {
    std::vector<double> th(free_idx_.size());
    for (std::size_t j = 0; j < free_idx_.size(); ++j) {
      th[j] = prob_.params[static_cast<std::size_t>(free_idx_[j])].value;
    }
    return th;
  }

  // Returns false on non-finite model output.
  bool residuals(const std::vector<double>& theta_free,
                 std::vector<double>& r) {
    for (std::size_t j = 0; j < free_idx_.size(); ++j) {
      theta_full_[static_cast<std::size_t>(free_idx_[j])] = theta_free[j];
    }
    prob_.model(prob_.x, theta_full_, model_out_);
    const std::size_t n = prob_.x.size();
    r.resize(n_res_);
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double sw =
          prob_.weights.empty() ? 1.0 : std::sqrt(prob_.weights[i]);
      if (prob_.complex_data) {
        r[2 * i] = sw * (prob_.y[i].real() - model_out_[i].real());
        r[2 * i + 1] = sw * (prob_.y[i].imag() - model_out_[i].imag());
        finite = finite && std::isfinite(r[2 * i]) && std::isfinite(r[2 * i + 1]);
      } else {
        r[i] = sw * (prob_.y[i].real() - model_out_[i].real());
        finite = finite && std::isfinite(r[i]);
      }
    }
    return finite;
  }

  // Central differences, one-sided at an active bound.  Returns false if any
  // probe produced non-finite output.
  bool jacobian(const std::vector<double>& theta,
                const std::vector<double>& r0, std::vector<double>& jac) {
    const int p = n_free();
    jac.assign(n_res_ * static_cast<std::size_t>(p), 0.0);
    std::vector<double> th = theta;
    std::vector<double> r_plus, r_minus;
    for (int j = 0; j < p; ++j) {
      const auto& par = prob_.params[static_cast<std::size_t>(free_idx_[j])];
      const double h = kRelDiffStep * std::max(std::abs(theta[j]), 1.0);
      double up = std::min(theta[j] + h, par.hi);
      double dn = std::max(theta[j] - h, par.lo);
      if (up == dn) continue;  // fully pinned parameter

      th[j] = up;
      const bool ok_up = (up == theta[j]) ? true : residuals(th, r_plus);
      if (up == theta[j]) r_plus = r0;
      th[j] = dn;
      const bool ok_dn = (dn == theta[j]) ? true : residuals(th, r_minus);
      if (dn == theta[j]) r_minus = r0;
      th[j] = theta[j];
      if (!ok_up || !ok_dn) return false;

      const double inv = 1.0 / (up - dn);
      for (std::size_t i = 0; i < n_res_; ++i) {
        jac[i * static_cast<std::size_t>(p) + j] =
            (r_plus[i] - r_minus[i]) * inv;
      }
    }
    return true;
  }

  void clamp(std::vector<double>& theta) const {
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const auto& par = prob_.params[static_cast<std::size_t>(free_idx_[j])];
      theta[j] = std::min(std::max(theta[j], par.lo), par.hi);
    }
  }

 private:
  const FitProblem& prob_;
  std::vector<int> free_idx_;
  std::vector<double> theta_full_;
  std::vector<std::complex<double>> model_out_;
  std::size_t n_res_{0};
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void validate_problem(const FitProblem& prob) {
  if (!prob.model) throw invalid_input_error("fit: missing model");
  if (prob.x.size() != prob.y.size()) {
    throw invalid_input_error("fit: x and y sizes differ");
  }
  if (!prob.weights.empty() && prob.weights.size() != prob.x.size()) {
    throw invalid_input_error("fit: weights size mismatch");
  }
  for (const double w : prob.weights) {
    if (!(w >= 0)) throw invalid_input_error("fit: weights must be >= 0");
  }
  int n_free = 0;
  for (const auto& par : prob.params) {
    if (!par.fixed) ++n_free;
    if (!(par.lo <= par.value && par.value <= par.hi)) {
      throw invalid_input_error("fit: initial value of '" + par.name +
                                "' violates its bounds");
    }
  }
  if (n_free == 0) throw invalid_input_error("fit: no free parameters");
  if (prob.x.size() <= static_cast<std::size_t>(n_free)) {
    throw invalid_input_error("fit: need more data points than parameters");
  }
}

}  // namespace

double FitResult::value(const std::string& name) const {
  for (const auto& par : params) {
    if (par.name == name) return par.value;
  }
  throw invalid_input_error("FitResult: unknown parameter '" + name + "'");
}

double FitResult::uncertainty(const std::string& name) const {
  for (std::size_t j = 0; j < free_names.size(); ++j) {
    if (free_names[j] == name) {
      const std::size_t n = free_names.size();
      const double var = covariance.empty() ? 0.0 : covariance[j * n + j];
      return var > 0 ? std::sqrt(var) : 0.0;
    }
  }
  for (const auto& par : params) {
    if (par.name == name) return 0.0;  // fixed parameter
  }
  throw invalid_input_error("FitResult: unknown parameter '" + name + "'");
}

FitResult levenberg_marquardt(const FitProblem& prob) {
  validate_problem(prob);
  Engine eng(prob);
  const int p = eng.n_free();

  std::vector<double> theta = eng.initial_free();
  std::vector<double> r;
  if (!eng.residuals(theta, r)) {
    throw invalid_input_error(
        "fit: model produced non-finite output at the initial parameters");
  }
  double cost = dot(r, r);

  FitResult res;
  res.params = prob.params;
  for (int j : eng.free_idx()) {
    res.free_names.push_back(prob.params[static_cast<std::size_t>(j)].name);
  }
  res.cost_history.push_back(cost);

  double lambda = kLambdaInit;
  std::vector<double> jac, g(static_cast<std::size_t>(p)),
      a0(static_cast<std::size_t>(p) * p), diag(static_cast<std::size_t>(p));
  std::vector<double> step, theta_try, r_try;

  const auto sync_result = [&](const std::vector<double>& th) {
    for (int j = 0; j < p; ++j) {
      res.params[static_cast<std::size_t>(eng.free_idx()[j])].value = th[j];
    }
  };

  bool have_jacobian = false;
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    res.iterations = iter;
    if (!eng.jacobian(theta, r, jac)) {
      throw invalid_input_error(
          "fit: model produced non-finite output while differentiating");
    }
    have_jacobian = true;

    // g = J^T r ; a0 = J^T J
    std::fill(g.begin(), g.end(), 0.0);
    std::fill(a0.begin(), a0.end(), 0.0);
    for (std::size_t i = 0; i < eng.n_residuals(); ++i) {
      const double* row = &jac[i * static_cast<std::size_t>(p)];
      for (int j = 0; j < p; ++j) {
        g[static_cast<std::size_t>(j)] += row[j] * r[i];
        for (int k = j; k < p; ++k) {
          a0[static_cast<std::size_t>(j) * p + k] += row[j] * row[k];
        }
      }
    }
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < j; ++k) {
        a0[static_cast<std::size_t>(j) * p + k] =
            a0[static_cast<std::size_t>(k) * p + j];
      }
    }

    double g_max = 0;
    for (const double gi : g) g_max = std::max(g_max, std::abs(gi));
    if (g_max < kGradTol) {
      res.converged = true;
      break;
    }

    double max_diag = 0;
    for (int j = 0; j < p; ++j) {
      max_diag = std::max(max_diag, a0[static_cast<std::size_t>(j) * p + j]);
    }
    if (max_diag <= 0) {
      res.converged = true;  // flat model: nothing to descend
      res.condition_warning = true;
      break;
    }
    for (int j = 0; j < p; ++j) {
      diag[static_cast<std::size_t>(j)] = std::max(
          a0[static_cast<std::size_t>(j) * p + j], 1e-12 * max_diag);
    }

    // Try a more optimistic damping first, then grow until a step is
    // accepted (classic Marquardt schedule: /10 on success, x10 on reject).
    bool accepted = false;
    double trial = lambda / 10.0;
    while (trial <= kLambdaMax) {
      std::vector<double> a = a0;
      std::vector<double> rhs(static_cast<std::size_t>(p));
      for (int j = 0; j < p; ++j) {
        a[static_cast<std::size_t>(j) * p + j] +=
            trial * diag[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(j)] = -g[static_cast<std::size_t>(j)];
      }
      if (!solve_linear(std::move(a), std::move(rhs), p, step)) {
        res.condition_warning = true;
        trial *= 10.0;
        continue;
      }
      theta_try = theta;
      for (int j = 0; j < p; ++j) theta_try[static_cast<std::size_t>(j)] += step[static_cast<std::size_t>(j)];
      eng.clamp(theta_try);
      const bool finite = eng.residuals(theta_try, r_try);
      const double cost_try = finite ? dot(r_try, r_try) : 0.0;
      if (finite && cost_try < cost) {
        theta = theta_try;
        r = r_try;
        const double prev_cost = cost;
        cost = cost_try;
        lambda = std::max(trial, 1e-15);
        res.cost_history.push_back(cost);
        accepted = true;
        if (cost == 0.0 ||
            prev_cost - cost <= kRelCostTol * std::max(prev_cost, 1e-300)) {
          res.converged = true;
        }
        break;
      }
      trial *= 10.0;
    }

    if (!accepted) {
      // Damping exhausted without a strictly better step.  Distinguish a
      // machine-precision optimum from a genuine stall with the step-size
      // test: at an optimum the near-Gauss-Newton step is negligible
      // relative to the parameters, while a pathological stall rejects a
      // step of meaningful size.
      bool at_optimum = cost == 0.0;
      if (!at_optimum) {
        std::vector<double> a = a0;
        std::vector<double> rhs(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
          a[static_cast<std::size_t>(j) * p + j] +=
              1e-12 * diag[static_cast<std::size_t>(j)];
          rhs[static_cast<std::size_t>(j)] = -g[static_cast<std::size_t>(j)];
        }
        if (solve_linear(std::move(a), std::move(rhs), p, step)) {
          double rel_step = 0;
          for (int j = 0; j < p; ++j) {
            rel_step = std::max(
                rel_step, std::abs(step[static_cast<std::size_t>(j)]) /
                              std::max(std::abs(theta[static_cast<std::size_t>(
                                           j)]),
                                       1.0));
          }
          at_optimum = rel_step < kStepTol;
        }
      }
      res.converged = at_optimum;
      res.condition_warning = !at_optimum;
      break;
    }
    if (res.converged) break;
  }

  sync_result(theta);
  res.residual_norm = std::sqrt(cost);

  // Covariance from J^T J at the optimum, scaled by chi^2 / dof.
  if (have_jacobian && !eng.jacobian(theta, r, jac)) {
    res.condition_warning = true;
    have_jacobian = false;
  }
  if (have_jacobian) {
    std::fill(a0.begin(), a0.end(), 0.0);
    for (std::size_t i = 0; i < eng.n_residuals(); ++i) {
      const double* row = &jac[i * static_cast<std::size_t>(p)];
      for (int j = 0; j < p; ++j) {
        for (int k = j; k < p; ++k) {
          a0[static_cast<std::size_t>(j) * p + k] += row[j] * row[k];
        }
      }
    }
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k < j; ++k) {
        a0[static_cast<std::size_t>(j) * p + k] =
            a0[static_cast<std::size_t>(k) * p + j];
      }
    }
    std::vector<double> inv;
    if (invert_matrix(a0, p, inv)) {
      const std::size_t m = eng.n_residuals();
      const double dof =
          m > static_cast<std::size_t>(p) ? double(m - static_cast<std::size_t>(p)) : 1.0;
      const double scale = cost / dof;
      for (auto& c : inv) c *= scale;
      res.covariance = std::move(inv);
    } else {
      res.condition_warning = true;
      res.covariance.assign(static_cast<std::size_t>(p) * p, 0.0);
    }
  }
  return res;
}

Trace add_noise(const Trace& clean, double snr_db,
                unsigned long long seed) {
  Trace out = clean;
  double ms = 0;
  for (const auto& v : clean.y) ms += std::norm(v);
  ms = clean.y.empty() ? 0.0 : ms / static_cast<double>(clean.y.size());
  const double sigma = std::sqrt(ms) * std::pow(10.0, -snr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (auto& v : out.y) {
    const double dre = dist(rng);
    const double dim = clean.complex_data ? dist(rng) : 0.0;
    v += std::complex<double>(dre, dim);
  }
  return out;
}

namespace {

std::vector<double> magnitudes(const Trace& trace) {
  std::vector<double> mag(trace.y.size());
  for (std::size_t i = 0; i < trace.y.size(); ++i) {
    mag[i] = trace.complex_data ? std::abs(trace.y[i]) : trace.y[i].real();
  }
  return mag;
}

// Width of the |y|^2 dip at half depth, interpolated on the data grid.
double half_depth_width(const std::vector<double>& x,
                        const std::vector<double>& mag, std::size_t i_min,
                        double bg) {
  const double level = 0.5 * (bg * bg + mag[i_min] * mag[i_min]);
  const auto sq = [&](std::size_t i) { return mag[i] * mag[i]; };
  double left = x.front(), right = x.back();
  bool found_left = false, found_right = false;
  for (std::size_t i = i_min; i > 0; --i) {
    if (sq(i - 1) >= level && sq(i) < level) {
      const double t = (level - sq(i - 1)) / (sq(i) - sq(i - 1));
      left = x[i - 1] + t * (x[i] - x[i - 1]);
      found_left = true;
      break;
    }
  }
  for (std::size_t i = i_min; i + 1 < x.size(); ++i) {
    if (sq(i + 1) >= level && sq(i) < level) {
      const double t = (level - sq(i)) / (sq(i + 1) - sq(i));
      right = x[i] + t * (x[i + 1] - x[i]);
      found_right = true;
      break;
    }
  }
  if (found_left && found_right) return right - left;
  if (found_left) return 2.0 * (x[i_min] - left);
  if (found_right) return 2.0 * (right - x[i_min]);
  return (x.back() - x.front()) / 10.0;
}

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  double s = 0;
  for (std::size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

}  // namespace

FitResult fit_resonator(const Trace& trace) {
  const std::size_t n = trace.x.size();
  if (n < 16 || trace.y.size() != n) {
    throw invalid_input_error("fit_resonator: need at least 16 points");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(trace.x[i] > trace.x[i - 1])) {
      throw invalid_input_error(
          "fit_resonator: frequencies must be strictly increasing");
    }
  }
  const std::vector<double> mag = magnitudes(trace);

  const std::size_t n_edge = std::max<std::size_t>(2, n / 20);
  double bg = 0.5 * (mean_of(mag, 0, n_edge) + mean_of(mag, n - n_edge, n));
  // Noise floor from the edge samples.
  double var = 0;
  for (std::size_t i = 0; i < n_edge; ++i) {
    var += (mag[i] - bg) * (mag[i] - bg);
    var += (mag[n - 1 - i] - bg) * (mag[n - 1 - i] - bg);
  }
  const double noise = std::sqrt(var / static_cast<double>(2 * n_edge));

  const std::size_t i_min = static_cast<std::size_t>(
      std::min_element(mag.begin(), mag.end()) - mag.begin());
  const double dip_amp = bg - mag[i_min];
  if (dip_amp < 3.0 * noise || dip_amp <= 0) {
    throw no_solution_error(
        "fit_resonator: no visible dip above the noise floor");
  }

  const double kappa0 = half_depth_width(trace.x, mag, i_min, bg);
  const double span = trace.x.back() - trace.x.front();
  if (span < 5.0 * kappa0) {
    throw invalid_input_error(
        "fit_resonator: trace must span at least 5 linewidths");
  }

  const double x_c = trace.x[i_min];
  const double min_over_bg = std::max(mag[i_min] / bg, 0.0);
  const double kappa_e0 = std::max(kappa0 * (1.0 - min_over_bg), 0.05 * kappa0);
  const double kappa_i0 = std::max(kappa0 - kappa_e0, 0.01 * kappa0);

  double tau0 = 0, alpha0 = 0;
  if (trace.complex_data) {
    // Unwrapped phase slope across the trace gives the electrical delay.
    // The notch itself contributes an antisymmetric phase S-curve that decays
    // only as 1/detuning, so even at several linewidths it biases an
    // edge-to-edge slope; subtract the dip phase predicted by the initial
    // kappa guesses before estimating tau.
    const double kappa_guess = kappa_e0 + kappa_i0;
    std::vector<double> phase(n);
    double prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::complex<double> dip =
          1.0 - (kappa_e0 / kappa_guess) /
                    std::complex<double>(1.0,
                                         2.0 * (trace.x[i] - x_c) / kappa_guess);
      double ph = std::arg(trace.y[i]) - std::arg(dip);
      if (i > 0) {
        while (ph - prev > std::numbers::pi) ph -= 2 * std::numbers::pi;
        while (ph - prev < -std::numbers::pi) ph += 2 * std::numbers::pi;
      }
      phase[i] = prev = ph;
    }
    const double slope = (mean_of(phase, n - n_edge, n) - mean_of(phase, 0, n_edge)) /
                         (mean_of(trace.x, n - n_edge, n) - mean_of(trace.x, 0, n_edge));
    tau0 = -slope / (2 * std::numbers::pi);
    alpha0 = std::remainder(
        phase[0] + 2 * std::numbers::pi * trace.x[0] * tau0,
        2 * std::numbers::pi);
  }

  const double inf = std::numeric_limits<double>::infinity();
  FitProblem prob;
  prob.x = trace.x;
  prob.complex_data = trace.complex_data;
  if (trace.complex_data) {
    prob.y = trace.y;
  } else {
    prob.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) prob.y[i] = mag[i] * mag[i];
  }
  const bool magnitude_mode = !trace.complex_data;
  prob.model = [x_c, magnitude_mode](const std::vector<double>& x,
                                     const std::vector<double>& th,
                                     std::vector<std::complex<double>>& out) {
    cavity::ResonatorParams res{th[0] + x_c, th[1], th[2], th[3],
                                th[4],       th[5], th[6]};
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto v = cavity::s21_bare(res, x[i]);
      out[i] = magnitude_mode ? std::complex<double>(std::norm(v), 0.0) : v;
    }
  };
  prob.params = {
      {"omega_c", 0.0, trace.x.front() - x_c, trace.x.back() - x_c, false},
      {"kappa_i", kappa_i0, 0.0, inf, false},
      {"kappa_e", kappa_e0, 1e-9, inf, false},
      {"amp", bg, 1e-12, inf, false},
      {"alpha", alpha0, -2 * std::numbers::pi, 2 * std::numbers::pi,
       magnitude_mode},
      {"tau", tau0, -inf, inf, magnitude_mode},
      {"psi", 0.0, -std::numbers::pi, std::numbers::pi, false},
  };
  if (magnitude_mode) {
    prob.params[4].value = 0.0;
    prob.params[5].value = 0.0;
  }

  FitResult res = levenberg_marquardt(prob);
  // Report the center frequency in absolute units.
  res.params[0].value += x_c;
  res.params[0].lo += x_c;
  res.params[0].hi += x_c;
  return res;
}

FitResult fit_rabi(const Trace& trace, const cavity::ResonatorParams& fixed,
                   int n_packets, const std::optional<RabiGuess>& guess) {
  const std::size_t n = trace.x.size();
  if (n < 16 || trace.y.size() != n) {
    throw invalid_input_error("fit_rabi: need at least 16 points");
  }
  const std::vector<double> mag = magnitudes(trace);
  const double kappa = fixed.kappa_e_mhz + fixed.kappa_i_mhz;
  const double x_c = fixed.omega_c_mhz;

  double g0, gamma0, sigma0, omega_a0;
  if (guess) {
    g0 = guess->g_coll_mhz;
    gamma0 = guess->gamma_perp_mhz;
    sigma0 = guess->sigma_mhz;
    omega_a0 = guess->omega_a_mhz;
  } else {
    // Locate the two deepest interior local minima separated by > kappa/2.
    std::vector<std::pair<double, double>> minima;  // (value, x)
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (mag[i] < mag[i - 1] && mag[i] < mag[i + 1]) {
        minima.emplace_back(mag[i], trace.x[i]);
      }
    }
    std::sort(minima.begin(), minima.end());
    double xa = x_c, xb = x_c;
    if (!minima.empty()) {
      xa = xb = minima[0].second;
      for (std::size_t k = 1; k < minima.size(); ++k) {
        if (std::abs(minima[k].second - xa) > 0.5 * kappa) {
          xb = minima[k].second;
          break;
        }
      }
    }
    const double sep = std::abs(xb - xa);
    g0 = sep > 0 ? 0.5 * sep : kappa;
    omega_a0 = 0.5 * (xa + xb);
    gamma0 = 0.5 * g0;
    sigma0 = 0.5 * g0;
  }

  FitProblem prob;
  prob.x = trace.x;
  prob.complex_data = trace.complex_data;
  if (trace.complex_data) {
    prob.y = trace.y;
  } else {
    prob.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) prob.y[i] = mag[i] * mag[i];
  }
  const bool magnitude_mode = !trace.complex_data;
  prob.model = [fixed, x_c, n_packets, magnitude_mode](
                   const std::vector<double>& x,
                   const std::vector<double>& th,
                   std::vector<std::complex<double>>& out) {
    ensemble::EnsembleModel model;
    model.g_coll_mhz = th[0];
    model.gamma_perp_mhz = th[1];
    model.dist.sigma_mhz = th[2];
    model.dist.omega_a_mhz = th[3] + x_c;
    const auto ens = ensemble::discretize(model, n_packets, 6.0);
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto v = ensemble::s21_coupled(fixed, ens, x[i]);
      out[i] = magnitude_mode ? std::complex<double>(std::norm(v), 0.0) : v;
    }
  };
  const double span = trace.x.back() - trace.x.front();
  prob.params = {
      {"g_coll", g0, 1e-6, 100.0 * kappa + span, false},
      {"gamma_perp", gamma0, 1e-6, 100.0 * span, false},
      {"sigma", sigma0, 1e-6, 100.0 * span, false},
      {"omega_a", omega_a0 - x_c, trace.x.front() - x_c - span,
       trace.x.back() - x_c + span, false},
  };

  FitResult res = levenberg_marquardt(prob);
  res.params[3].value += x_c;
  res.params[3].lo += x_c;
  res.params[3].hi += x_c;
  return res;
}

FitResult fit_gaussian_scan(const std::vector<double>& x,
                            const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 8 || y.size() != n) {
    throw invalid_input_error("fit_gaussian_scan: need at least 8 points");
  }
  const std::size_t n_edge = std::max<std::size_t>(1, n / 10);
  double b0 = 0.5 * (mean_of(y, 0, n_edge) + mean_of(y, n - n_edge, n));
  std::size_t i_ext = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(y[i] - b0) > std::abs(y[i_ext] - b0)) i_ext = i;
  }
  const double a0 = b0 - y[i_ext];
  const double x_c = x[i_ext];
  const double span = std::abs(x.back() - x.front());

  // Half width at half depth around the extremum.
  double hwhm = span / 6.0;
  for (std::size_t i = i_ext; i + 1 < n; ++i) {
    if (std::abs(y[i + 1] - b0) < 0.5 * std::abs(a0)) {
      hwhm = std::abs(x[i + 1] - x[i_ext]);
      break;
    }
  }
  const double sigma0 = hwhm / std::sqrt(2.0 * std::numbers::ln2);

  FitProblem prob;
  prob.x = x;
  prob.complex_data = false;
  prob.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) prob.y[i] = y[i];
  prob.model = [x_c](const std::vector<double>& xs,
                     const std::vector<double>& th,
                     std::vector<std::complex<double>>& out) {
    out.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double d = xs[i] - (th[2] + x_c);
      out[i] = th[1] - th[0] * std::exp(-d * d / (2.0 * th[3] * th[3]));
    }
  };
  const double inf = std::numeric_limits<double>::infinity();
  prob.params = {
      {"a", a0, -inf, inf, false},
      {"b", b0, -inf, inf, false},
      {"omega_a", 0.0, -span, span, false},
      {"sigma", sigma0, 1e-9 * std::max(span, 1.0), 100.0 * span, false},
  };

  FitResult res = levenberg_marquardt(prob);
  res.params[2].value += x_c;
  res.params[2].lo += x_c;
  res.params[2].hi += x_c;
  return res;
}

FitResult fit_decay(const std::vector<double>& t, const std::vector<double>& y,
                    DecayForm form) {
  const std::size_t n = t.size();
  if (n < 3 || y.size() != n) {
    throw invalid_input_error("fit_decay: need at least 3 points");
  }
  double t_max = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0)) {
      throw invalid_input_error("fit_decay: amplitudes must be positive");
    }
    if (t[i] < 0) throw invalid_input_error("fit_decay: times must be >= 0");
    t_max = std::max(t_max, t[i]);
  }
  if (!(t_max > 0)) throw invalid_input_error("fit_decay: need t_max > 0");

  // Log-linear regression for initial guesses.
  const auto u_of = [&](double tt) {
    switch (form) {
      case DecayForm::exp:
        return tt;
      case DecayForm::hahn_2tau:
        return 2.0 * tt;
      case DecayForm::stretched_sqrt:
        return std::sqrt(tt);
    }
    return tt;
  };
  double su = 0, sl = 0, suu = 0, sul = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u_of(t[i]);
    const double l = std::log(y[i]);
    su += u;
    sl += l;
    suu += u * u;
    sul += u * l;
  }
  const double nn = static_cast<double>(n);
  const double denom = nn * suu - su * su;
  double slope = denom != 0 ? (nn * sul - su * sl) / denom : 0.0;
  const double intercept = (sl - slope * su) / nn;

  const double t_hi = 1e6 * t_max;
  const double t_lo = 1e-9 * t_max;
  double t_const0;
  if (slope < 0) {
    const double s = -slope;
    t_const0 = form == DecayForm::stretched_sqrt ? 1.0 / (s * s) : 1.0 / s;
    if (form == DecayForm::hahn_2tau) t_const0 = 1.0 / s;  // u already has 2t
  } else {
    t_const0 = t_hi;  // non-decaying trend: start at the upper bound
  }
  t_const0 = std::min(std::max(t_const0, t_lo), t_hi);
  const double a00 = std::exp(intercept);

  FitProblem prob;
  prob.x = t;
  prob.complex_data = false;
  prob.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) prob.y[i] = y[i];
  prob.model = [form](const std::vector<double>& ts,
                      const std::vector<double>& th,
                      std::vector<std::complex<double>>& out) {
    out.resize(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
      double e = 0;
      switch (form) {
        case DecayForm::exp:
          e = ts[i] / th[1];
          break;
        case DecayForm::hahn_2tau:
          e = 2.0 * ts[i] / th[1];
          break;
        case DecayForm::stretched_sqrt:
          e = std::sqrt(ts[i] / th[1]);
          break;
      }
      out[i] = th[0] * std::exp(-e);
    }
  };
  prob.params = {
      {"a0", a00, 1e-300, std::numeric_limits<double>::infinity(), false},
      {"t_const", t_const0, t_lo, t_hi, false},
  };

  FitResult res = levenberg_marquardt(prob);
  if (res.params[1].value >= 0.99 * t_hi) res.converged = false;

  // Warn when the series trends upward (correlation with decay < 0).
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= nn;
  my /= nn;
  double ctt = 0, cty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ctt += (t[i] - mt) * (t[i] - mt);
    cty += (t[i] - mt) * (y[i] - my);
  }
  if (ctt > 0 && cty > 0) res.condition_warning = true;
  return res;
}

}  // namespace spinres::fitkit
