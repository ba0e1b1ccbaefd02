#include "perpetual/numerics.hpp"

#include <queue>
#include <sstream>

namespace perpetual {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::MaxSubdivisions: return "MaxSubdivisions";
    case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::StopNeverReached: return "StopNeverReached";
    case ErrorCode::NonPositiveAsset: return "NonPositiveAsset";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::InversionFailed: return "InversionFailed";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NotSIndependent: return "NotSIndependent";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::BracketExpansionFailed: return "BracketExpansionFailed";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
  }
  return "Unknown";
}

void ToleranceSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_iter < 1) {
    std::ostringstream os;
    os << "invalid tolerance (rel_tol=" << rel_tol << ", abs_tol=" << abs_tol
       << ", max_iter=" << max_iter << ")";
    throw Error(ErrorCode::InvalidParams, os.str());
  }
}

namespace detail {

void throw_ode_error(ErrorCode code, double x, const std::string& msg) {
  std::ostringstream os;
  os << msg << " at x=" << x;
  throw Error(code, os.str());
}

}  // namespace detail

double find_root(const ScalarFunction& f, Bracket bracket, const ToleranceSpec& tol) {
  tol.validate();
  double a = bracket.lo;
  double b = bracket.hi;
  double fa = f(a);
  double fb = f(b);
  if (!std::isfinite(fa) || !std::isfinite(fb))
    throw Error(ErrorCode::NoSignChange, "non-finite function value at bracket end");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    std::ostringstream os;
    os << "f(" << a << ")=" << fa << " and f(" << b << ")=" << fb << " have the same sign";
    throw Error(ErrorCode::NoSignChange, os.str());
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a, fc = fa;
  double d = b - a, e = d;

  for (int iter = 0; iter < tol.max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * std::max(tol.abs_tol, tol.rel_tol * std::abs(b));
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // inverse quadratic interpolation, secant when only two points differ
      const double s = fb / fa;
      double p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
    if (!std::isfinite(fb)) throw Error(ErrorCode::NonFiniteIntegrand, "non-finite function value in root search");
  }
  throw Error(ErrorCode::MaxIterExceeded, "root finder did not converge");
}

namespace {

// 15-point Kronrod abscissae; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const ScalarFunction& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  if (!std::isfinite(fc)) throw Error(ErrorCode::NonFiniteIntegrand, "integrand not finite");
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    if (!std::isfinite(f1) || !std::isfinite(f2))
      throw Error(ErrorCode::NonFiniteIntegrand, "integrand not finite");
    kronrod += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate_adaptive_detailed(const ScalarFunction& f, double a, double b,
                                             const ToleranceSpec& tol) {
  tol.validate();
  if (a == b) return {};
  if (a > b) {
    auto r = integrate_adaptive_detailed(f, b, a, tol);
    r.value = -r.value;
    return r;
  }

  std::priority_queue<Segment> work;
  std::vector<Segment> done;  // too narrow to split further
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value;
  double total_err = first.error;
  work.push(first);

  int splits = 0;
  auto target = [&] { return std::max(tol.abs_tol, tol.rel_tol * std::abs(total)); };
  while (!work.empty() && total_err > target()) {
    if (splits >= tol.max_iter) {
      std::ostringstream os;
      os << "error estimate " << total_err << " above target " << target() << " after " << splits
         << " subdivisions on [" << a << ", " << b << "]";
      throw Error(ErrorCode::MaxSubdivisions, os.str());
    }
    Segment worst = work.top();
    work.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b) ||
        (worst.b - worst.a) < 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(worst.a), std::abs(worst.b))) {
      done.push_back(worst);
      continue;
    }
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    ++splits;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    work.push(left);
    work.push(right);
  }

  // Re-sum to shed the drift from the running updates.
  double value = 0.0, error = 0.0;
  int count = 0;
  for (; !work.empty(); work.pop(), ++count) {
    value += work.top().value;
    error += work.top().error;
  }
  for (const auto& s : done) {
    value += s.value;
    error += s.error;
    ++count;
  }
  return {value, error, count};
}

}  // namespace perpetual
