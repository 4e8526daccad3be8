#include "orderk/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orderk/core.hpp"

namespace orderk {

namespace {

// Series for P(a, x), valid and fast for x < a + 1.
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), modified Lentz; x >= a + 1.
double upper_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void require_ctable_dimension(const CTable& ctable, const ModelParams& params) {
  if (ctable.n() != params.n) {
    throw Error(ErrorKind::MissingConstant, "C-table is for n=" + std::to_string(ctable.n()) +
                                                " but the model has n=" + std::to_string(params.n));
  }
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorKind::DomainError, "incomplete gamma needs a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_fraction(a, x);
}

double lower_incomplete_gamma(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) {
    throw Error(ErrorKind::DomainError, "incomplete gamma needs a > 0 and x >= 0");
  }
  if (std::isinf(x)) return std::tgamma(a);
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) {
    // Avoid the Gamma(a) round trip: gamma(a, x) = x^a e^-x sum x^n / (a)_(n+1).
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x));
  }
  return std::tgamma(a) * (1.0 - upper_fraction(a, x));
}

double unit_ball_volume(int n) {
  return std::exp(0.5 * n * std::log(std::numbers::pi) - std::lgamma(1.0 + 0.5 * n));
}

void ModelParams::validate() const {
  if (n < 1 || n > 8) throw Error(ErrorKind::DomainError, "dimension n must lie in [1, 8]");
  if (k < 1) throw Error(ErrorKind::DomainError, "order k must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorKind::DomainError, "rho must be positive");
  if (!(volume >= 0.0) || !std::isfinite(volume)) {
    throw Error(ErrorKind::DomainError, "window volume must be nonnegative");
  }
  if (!(r0 >= 0.0)) throw Error(ErrorKind::DomainError, "r0 must be nonnegative");
}

void CTable::set(int v, int u, CTableEntry entry) {
  if (v < 1 || v > u || u > n_) {
    throw Error(ErrorKind::InvalidType, "C-table entries need 1 <= v <= u <= n");
  }
  if (!(entry.value > 0.0) || !std::isfinite(entry.value)) {
    throw Error(ErrorKind::InvalidInput, "C-table values must be positive");
  }
  entries_[{v, u}] = std::move(entry);
}

const CTableEntry& CTable::entry(int v, int u) const {
  const auto it = entries_.find({v, u});
  if (it == entries_.end()) {
    throw Error(ErrorKind::MissingConstant, "no constant C_" + std::to_string(v) + "^{" +
                                                std::to_string(u) + "," + std::to_string(n_) + "}");
  }
  return it->second;
}

double expected_area(int ell, const ModelParams& params) {
  params.validate();
  const int n = params.n;
  const int k = params.k;
  if (ell < 0 || ell > n) throw Error(ErrorKind::DomainError, "skeleton dimension out of range");
  if (ell == n) return 1.0;

  const double nd = n;
  const double ld = ell;
  const double common = (n - ell + 1) * std::log(2.0) + 0.5 * (n - ell) * std::log(std::numbers::pi) -
                        std::log(nd) - std::lgamma(n - ell + 2.0) +
                        std::lgamma((nd * nd - nd * ld + ld + 1.0) / 2.0) +
                        (nd - ld + ld / nd) * std::lgamma(1.0 + nd / 2.0) -
                        std::lgamma((nd * nd - nd * ld + ld) / 2.0) -
                        (nd - ld) * std::lgamma((nd + 1.0) / 2.0) - std::lgamma((ld + 1.0) / 2.0);
  double sum = 0.0;
  for (int i = std::max(0, k + ell - n); i <= k - 1; ++i) {
    sum += std::exp(common - std::lgamma(i + 1.0) + std::lgamma(nd - ld + i + ld / nd));
  }
  return std::pow(params.rho, (nd - ld) / nd) * sum;
}

double interval_prefactor(int u, int g, const ModelParams& params) {
  const int k = params.k;
  if (u < 1 || g < 1 || g > k) {
    throw Error(ErrorKind::InvalidType, "interval prefactor needs u >= 1 and 1 <= g <= k");
  }
  const double a = u + k - g;
  const double log_norm = std::lgamma(a) - std::lgamma(k - g + 1.0) - std::lgamma(static_cast<double>(u));
  if (std::isinf(params.r0)) return std::exp(log_norm);
  const double x = params.rho * params.nu() * std::pow(params.r0, params.n);
  return regularized_lower_gamma(a, x) * std::exp(log_norm);
}

double expected_interval_count(const IntervalType& type, const ModelParams& params,
                               const CTable& ctable) {
  params.validate();
  const auto [v, u, g] = type;
  if (u == 0) {
    return (v == 0 && g == 1 && params.k == 1) ? params.rho * params.volume : 0.0;
  }
  if (!admissible(v, u, g, params.k)) return 0.0;
  require_ctable_dimension(ctable, params);
  return interval_prefactor(u, g, params) * ctable.at(v, u) * params.rho * params.volume;
}

double expected_cell_count(int j, const ModelParams& params, const CTable& ctable) {
  params.validate();
  const int n = params.n;
  const int k = params.k;
  if (j < 0 || j > n) throw Error(ErrorKind::DomainError, "cell dimension out of range");
  const double scale = params.rho * params.volume;
  if (j == 0 && k == 1) return scale;
  require_ctable_dimension(ctable, params);

  double sum = 0.0;
  if (j == 0) {
    for (int u = 1; u <= n; ++u) {
      for (int v = 1; v <= u && v + 1 <= k; ++v) {
        sum += interval_prefactor(u, v + 1, params) * ctable.at(v, u);
      }
    }
    return scale * sum;
  }
  for (int u = j; u <= n; ++u) {
    for (int v = 1; v <= u; ++v) {
      const double c = ctable.at(v, u);
      for (int g = 1; g <= std::min(k, u); ++g) {
        const int t0 = std::max({0, v - j, g - j});
        const int t1 = std::min({v + 1, u - j, g - 1});
        double faces = 0.0;
        for (int t = t0; t <= t1; ++t) {
          faces += static_cast<double>(binomial(v + 1, t) * binomial(u - v, t + j - v));
        }
        if (faces > 0.0) sum += c * interval_prefactor(u, g, params) * faces;
      }
    }
  }
  return scale * sum;
}

double expected_cell_count_by_intervals(int j, const ModelParams& params, const CTable& ctable) {
  params.validate();
  const int n = params.n;
  if (j < 0 || j > n) throw Error(ErrorKind::DomainError, "cell dimension out of range");
  double sum = 0.0;
  for (int u = j; u <= n; ++u) {
    for (int v = 0; v <= u; ++v) {
      for (int g = 1; g <= std::min(params.k, u + 1); ++g) {
        if (!admissible_type(v, u, g)) continue;
        const auto faces = n_faces(v, g, u, j);
        if (faces == 0) continue;
        sum += static_cast<double>(faces) * expected_interval_count({v, u, g}, params, ctable);
      }
    }
  }
  return sum;
}

double radius_cdf(int j, const ModelParams& params, const CTable& ctable, double r) {
  if (!(r >= 0.0)) throw Error(ErrorKind::DomainError, "radius must be nonnegative");
  ModelParams all = params;
  all.r0 = kInfiniteRadius;
  const double total = expected_cell_count(j, all, ctable);
  if (!(total > 0.0)) throw Error(ErrorKind::DomainError, "no cells of this dimension expected");
  ModelParams upto = params;
  upto.r0 = r;
  return std::clamp(expected_cell_count(j, upto, ctable) / total, 0.0, 1.0);
}

}  // namespace orderk
