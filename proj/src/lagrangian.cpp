#include "varker/lagrangian.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace varker {

namespace {

SymbolTable lagrangian_symbols(int dim, const Parameters& parameters) {
  if (dim < 1) throw InputError("lagrangian: dimension must be >= 1");
  SymbolTable s;
  for (int i = 1; i <= 4; ++i) s.variable("x" + std::to_string(i), dim);
  s.variable("t", 1);
  for (const auto& [name, value] : parameters) s.parameter(name, value);
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

LagrangianExpr::LagrangianExpr(std::string source, int dim, Parameters parameters)
    : dim_(dim),
      parameters_(std::move(parameters)),
      symbols_(lagrangian_symbols(dim, parameters_)),
      expr_(Expression::parse(source, symbols_)) {
  if (!expr_.is_scalar()) throw InputError("lagrangian: expression is vector-valued, expected a scalar");
}

LagrangianExpr parse_lagrangian(const std::string& source, int dim, const Parameters& parameters) {
  return LagrangianExpr(source, dim, parameters);
}

std::vector<double> LagrangianExpr::pack(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                                         const Eigen::VectorXd& x3, const Eigen::VectorXd& x4, double t) const {
  std::vector<double> packed(static_cast<size_t>(4 * dim_ + 1));
  const Eigen::VectorXd* xs[4] = {&x1, &x2, &x3, &x4};
  for (int i = 0; i < 4; ++i) {
    if (xs[i]->size() != dim_) throw InputError("lagrangian: x" + std::to_string(i + 1) + " has wrong dimension");
    for (int k = 0; k < dim_; ++k) packed[static_cast<size_t>(i * dim_ + k)] = (*xs[i])[k];
  }
  packed.back() = t;
  return packed;
}

double LagrangianExpr::eval(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, const Eigen::VectorXd& x3,
                            const Eigen::VectorXd& x4, double t) const {
  return eval(pack(x1, x2, x3, x4, t));
}

LagrangianExpr::Partials LagrangianExpr::partials(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                                                  const Eigen::VectorXd& x3, const Eigen::VectorXd& x4,
                                                  double t) const {
  const auto packed = pack(x1, x2, x3, x4, t);
  std::vector<double> g(static_cast<size_t>(4 * dim_));
  Partials out;
  out.value = eval_partials(packed, g);
  for (int i = 0; i < 4; ++i) out.d[static_cast<size_t>(i)] = Eigen::Map<const Eigen::VectorXd>(g.data() + i * dim_, dim_);
  return out;
}

std::string to_string(GrowthMode mode) {
  switch (mode) {
    case GrowthMode::standard: return "P";
    case GrowthMode::relaxed1: return "P1";
    case GrowthMode::relaxed2: return "P2";
  }
  return {};
}

GrowthMode growth_mode_from_string(const std::string& name) {
  if (name == "P" || name == "standard") return GrowthMode::standard;
  if (name == "P1" || name == "relaxed1") return GrowthMode::relaxed1;
  if (name == "P2" || name == "relaxed2") return GrowthMode::relaxed2;
  throw InputError("unknown growth mode '" + name + "' (expected P, P1 or P2)");
}

std::string to_string(ConvexityMode mode) {
  switch (mode) {
    case ConvexityMode::full: return "full";
    case ConvexityMode::in_x2x3x4: return "in_x2x3x4";
    case ConvexityMode::in_x3x4: return "in_x3x4";
  }
  return {};
}

ConvexityMode convexity_mode_from_string(const std::string& name) {
  if (name == "full") return ConvexityMode::full;
  if (name == "in_x2x3x4") return ConvexityMode::in_x2x3x4;
  if (name == "in_x3x4") return ConvexityMode::in_x3x4;
  throw InputError("unknown convexity mode '" + name + "' (expected full, in_x2x3x4 or in_x3x4)");
}

namespace {

constexpr double kSlack = 1e-12;

bool le(double lhs, double rhs) { return lhs <= rhs + kSlack * std::max(1.0, std::abs(rhs)); }

double conj(double r) { return r / (r - 1.0); }

// Random point of (R^d)^4 x [a, b]; the radius cycles over three scales.
class PointSampler {
 public:
  PointSampler(int dim, const SpotCheckOptions& spot) : dim_(dim), a_(spot.a), b_(spot.b), rng_(spot.seed) {}

  std::vector<double> next(int k) {
    static constexpr double kRadii[] = {0.1, 1.0, 10.0};
    const double r = kRadii[k % 3];
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> time(a_, b_);
    std::vector<double> x(static_cast<size_t>(4 * dim_ + 1));
    for (int i = 0; i < 4 * dim_; ++i) x[static_cast<size_t>(i)] = r * unit(rng_);
    x.back() = time(rng_);
    return x;
  }

 private:
  int dim_;
  double a_, b_;
  std::mt19937_64 rng_;
};

double block_norm(std::span<const double> packed, int block, int dim) {
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += packed[static_cast<size_t>(block * dim + k)] * packed[static_cast<size_t>(block * dim + k)];
  return std::sqrt(s);
}

double power(double base, double e) { return e == 0.0 ? 1.0 : std::pow(base, e); }

struct CompiledTerm {
  Expression coefficient;
  GrowthTerm term;
};

const char* const kBoundNames[5] = {"P0", "P1", "P2", "P3", "P4"};

std::string describe_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

}  // namespace

CheckReport check_regularity(const LagrangianExpr& lagrangian, const RegularityCertificate& cert, double p,
                             double q, const SpotCheckOptions& spot) {
  CheckReport report;
  const std::string mode = to_string(cert.mode);
  switch (cert.mode) {
    case GrowthMode::standard:
      report.condition = "|L| <= P0, |d_i L| <= P_i; P0,P1 in P_1, P2,P4 in P_q', P3 in P_p'; d2 + (q/p)d3 + d4 <= q/M";
      break;
    case GrowthMode::relaxed1:
      report.condition = "|L| <= P0, |d_i L| <= P_i; P0,P1 in P1_1, P2,P4 in P1_q', P3 in P1_p'; (q/p)d3 + d4 <= q/M";
      break;
    case GrowthMode::relaxed2:
      report.condition = "|L| <= P0, |d_i L| <= P_i; P0..P4 in P2_M; 0 <= d3 <= p";
      break;
  }
  if (!(p > 1.0 && q > 1.0) || std::isinf(p) || std::isinf(q)) {
    report.fail("exponents must satisfy 1 < p, q < inf");
    return report;
  }
  const double memberships[5] = {1.0, 1.0, conj(q), conj(p), conj(q)};
  const int dim = lagrangian.dim();

  std::array<std::vector<CompiledTerm>, 5> compiled;
  for (int k = 0; k < 5; ++k) {
    const auto& bound = cert.bounds[static_cast<size_t>(k)];
    const std::string name = kBoundNames[k];
    if (!bound) {
      report.fail(name + " not supplied");
      continue;
    }
    const double M = memberships[k];
    for (size_t j = 0; j < bound->size(); ++j) {
      const GrowthTerm& t = (*bound)[j];
      const std::string where = name + " term " + std::to_string(j + 1) + ": ";
      Expression coef;
      try {
        coef = Expression::parse(t.coefficient, lagrangian.symbols());
      } catch (const InputError& e) {
        report.fail(where + "coefficient: " + e.what());
        continue;
      }
      if (!coef.is_scalar()) report.fail(where + "coefficient is not scalar");
      std::vector<std::string> forbidden = {"x3"};
      if (cert.mode == GrowthMode::standard) forbidden = {"x2", "x3", "x4"};
      if (cert.mode == GrowthMode::relaxed1) forbidden = {"x3", "x4"};
      for (const auto& v : forbidden) {
        if (coef.references(v)) report.fail(where + "coefficient depends on " + v + ", not allowed in " + mode + "_M");
      }
      const bool check_d2 = cert.mode == GrowthMode::standard;
      const bool check_d4 = cert.mode != GrowthMode::relaxed2;
      if (t.d2 < 0 || t.d3 < 0 || t.d4 < 0) report.fail(where + "exponents must be >= 0");
      if (check_d2 && t.d2 > q) report.fail(where + "d2 = " + fmt(t.d2) + " exceeds q");
      if (t.d3 > p) report.fail(where + "d3 = " + fmt(t.d3) + " exceeds p (condition 0 <= d3 <= p)");
      if (check_d4 && t.d4 > q) report.fail(where + "d4 = " + fmt(t.d4) + " exceeds q");
      if (cert.mode == GrowthMode::standard) {
        const double lhs = t.d2 + (q / p) * t.d3 + t.d4;
        if (!le(lhs, q / M)) {
          report.fail(where + "d2 + (q/p)d3 + d4 <= q/M violated (" + fmt(lhs) + " > " + fmt(q / M) + ", M = " + fmt(M) + ")");
        }
      } else if (cert.mode == GrowthMode::relaxed1) {
        const double lhs = (q / p) * t.d3 + t.d4;
        if (!le(lhs, q / M)) {
          report.fail(where + "(q/p)d3 + d4 <= q/M violated (" + fmt(lhs) + " > " + fmt(q / M) + ", M = " + fmt(M) + ")");
        }
      }
      if (coef.is_scalar()) compiled[static_cast<size_t>(k)].push_back({coef, t});
    }
  }

  // Empirical domination at random points.
  PointSampler sampler(dim, spot);
  std::vector<double> grad(static_cast<size_t>(4 * dim));
  std::array<bool, 5> reported{};
  for (int s = 0; s < spot.samples; ++s) {
    const auto x = sampler.next(s);
    double value = 0.0;
    try {
      value = lagrangian.eval_partials(x, grad);
    } catch (const DomainError& e) {
      report.fail(std::string("L not finite at ") + describe_point(x) + ": " + e.what());
      break;
    }
    const double n2 = block_norm(x, 1, dim), n3 = block_norm(x, 2, dim), n4 = block_norm(x, 3, dim);
    for (int k = 0; k < 5; ++k) {
      if (reported[static_cast<size_t>(k)] || !cert.bounds[static_cast<size_t>(k)]) continue;
      double bound = 0.0;
      bool negative = false;
      for (const auto& ct : compiled[static_cast<size_t>(k)]) {
        double c = 0.0;
        try {
          c = ct.coefficient.evaluate(x);
        } catch (const DomainError&) {
          c = std::nan("");
        }
        if (!(c >= -kSlack)) negative = true;
        bound += c * power(n2, ct.term.d2) * power(n3, ct.term.d3) * power(n4, ct.term.d4);
      }
      const double actual = k == 0 ? std::abs(value) : block_norm(grad, k - 1, dim);
      const std::string label = k == 0 ? "|L|" : "|d" + std::to_string(k) + "L|";
      if (negative) {
        report.fail(std::string(kBoundNames[k]) + ": coefficient negative or undefined at " + describe_point(x));
        reported[static_cast<size_t>(k)] = true;
      } else if (!(actual <= bound * (1.0 + 1e-9) + kSlack)) {
        report.fail("spot check: " + label + " = " + fmt(actual) + " > " + kBoundNames[k] + " = " + fmt(bound) +
                    " at " + describe_point(x));
        reported[static_cast<size_t>(k)] = true;
      }
    }
  }
  return report;
}

CheckReport check_coercivity(const LagrangianExpr& lagrangian, const CoercivityCertificate& cert, double p,
                             double q, const SpotCheckOptions& spot) {
  CheckReport report;
  switch (cert.mode) {
    case GrowthMode::standard:
      report.condition = "L >= c0|x3|^p + sum c_k |x1|^d1 |x2|^d2 |x3|^d3 |x4|^d4; c0 > 0; d2 + (q/p)d3 + d4 <= q; "
                         "d1 + d2 + d3 + d4 < p";
      break;
    case GrowthMode::relaxed1:
      report.condition = "L >= c0|x3|^p + sum c_k |x1|^d1 |x2|^d2 |x3|^d3 |x4|^d4; c0 > 0; (q/p)d3 + d4 <= q; "
                         "d1 + d2 + d3 + d4 < p";
      break;
    case GrowthMode::relaxed2:
      report.condition = "L >= c0|x3|^p + sum c_k |x1|^d1 |x2|^d2 |x3|^d3 |x4|^d4; c0 > 0; d3 <= p; "
                         "d1 + d2 + d3 + d4 < p";
      break;
  }
  if (!(p > 1.0 && q > 1.0) || std::isinf(p) || std::isinf(q)) {
    report.fail("exponents must satisfy 1 < p, q < inf");
    return report;
  }
  if (!(cert.c0 > 0.0)) report.fail("c0 > 0 violated (c0 = " + fmt(cert.c0) + ")");
  for (size_t j = 0; j < cert.terms.size(); ++j) {
    const CoercivityTerm& t = cert.terms[j];
    const std::string where = "term " + std::to_string(j + 1) + ": ";
    if (!std::isfinite(t.coefficient)) report.fail(where + "coefficient is not finite");
    if (t.d1 < 0 || t.d2 < 0 || t.d3 < 0 || t.d4 < 0) report.fail(where + "exponents must be >= 0");
    if (t.d2 > q) report.fail(where + "d2 exceeds q");
    if (t.d3 > p) report.fail(where + "d3 exceeds p");
    if (t.d4 > q) report.fail(where + "d4 exceeds q");
    if (cert.mode == GrowthMode::standard) {
      const double lhs = t.d2 + (q / p) * t.d3 + t.d4;
      if (!le(lhs, q)) report.fail(where + "d2 + (q/p)d3 + d4 <= q violated (" + fmt(lhs) + " > " + fmt(q) + ")");
    } else if (cert.mode == GrowthMode::relaxed1) {
      const double lhs = (q / p) * t.d3 + t.d4;
      if (!le(lhs, q)) report.fail(where + "(q/p)d3 + d4 <= q violated (" + fmt(lhs) + " > " + fmt(q) + ")");
    }
    const double sum = t.d1 + t.d2 + t.d3 + t.d4;
    if (!(sum < p)) report.fail(where + "d1 + d2 + d3 + d4 < p violated (" + fmt(sum) + " >= " + fmt(p) + ")");
  }

  const int dim = lagrangian.dim();
  PointSampler sampler(dim, spot);
  for (int s = 0; s < spot.samples; ++s) {
    const auto x = sampler.next(s);
    double value = 0.0;
    try {
      value = lagrangian.eval(x);
    } catch (const DomainError& e) {
      report.fail(std::string("L not finite at ") + describe_point(x) + ": " + e.what());
      break;
    }
    const double n[4] = {block_norm(x, 0, dim), block_norm(x, 1, dim), block_norm(x, 2, dim), block_norm(x, 3, dim)};
    double rhs = cert.c0 * std::pow(n[2], p);
    for (const auto& t : cert.terms) {
      rhs += t.coefficient * power(n[0], t.d1) * power(n[1], t.d2) * power(n[2], t.d3) * power(n[3], t.d4);
    }
    if (!(value >= rhs - 1e-9 * (1.0 + std::abs(rhs) + std::abs(value)))) {
      report.fail("spot check: L = " + fmt(value) + " < lower bound " + fmt(rhs) + " at " + describe_point(x));
      break;
    }
  }
  return report;
}

CheckReport check_convexity(const LagrangianExpr& lagrangian, ConvexityMode mode, int samples, double a, double b,
                            std::uint64_t seed) {
  CheckReport report;
  switch (mode) {
    case ConvexityMode::full: report.condition = "L(., t) convex on (R^d)^4"; break;
    case ConvexityMode::in_x2x3x4: report.condition = "L(x1, ., t) convex on (R^d)^3"; break;
    case ConvexityMode::in_x3x4: report.condition = "L(x1, x2, ., t) convex on (R^d)^2"; break;
  }
  if (samples < 1) throw InputError("check_convexity: samples must be >= 1");
  const int dim = lagrangian.dim();
  SpotCheckOptions spot;
  spot.a = a;
  spot.b = b;
  spot.seed = seed;
  PointSampler sampler(dim, spot);

  // Number of leading blocks held fixed for each test run on a draw.
  std::vector<int> frozen;
  switch (mode) {
    case ConvexityMode::full: frozen = {0, 1, 2}; break;
    case ConvexityMode::in_x2x3x4: frozen = {1}; break;
    case ConvexityMode::in_x3x4: frozen = {2}; break;
  }
  constexpr double kTol = 1e-10;
  std::vector<double> mid(static_cast<size_t>(4 * dim + 1));
  for (int s = 0; s < samples; ++s) {
    const auto y = sampler.next(s);
    const auto z0 = sampler.next(s);
    for (int f : frozen) {
      auto z = z0;
      z.back() = y.back();
      for (int i = 0; i < f * dim; ++i) z[static_cast<size_t>(i)] = y[static_cast<size_t>(i)];
      for (size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (y[i] + z[i]);
      double ly, lz, lm;
      try {
        ly = lagrangian.eval(y);
        lz = lagrangian.eval(z);
        lm = lagrangian.eval(mid);
      } catch (const DomainError& e) {
        report.fail(std::string("L not finite during convexity test: ") + e.what());
        return report;
      }
      if (lm > 0.5 * (ly + lz) + kTol) {
        report.fail("midpoint convexity violated: L(mid) = " + fmt(lm) + " > " + fmt(0.5 * (ly + lz)) + " for y = " +
                    describe_point(y) + ", z = " + describe_point(z));
        return report;
      }
    }
  }
  return report;
}

}  // namespace varker
