#ifndef TIKDYN_CONVEX_HPP
#define TIKDYN_CONVEX_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "tikdyn/common.hpp"

namespace tikdyn {

/// Infimum of a convex function: attained, finite but not attained, or unknown.
struct Infimum {
  enum class Kind { attained, unattained, unknown };
  Kind kind = Kind::unknown;
  double value = 0.0;

  static Infimum attained(double v) { return {Kind::attained, v}; }
  static Infimum unattained(double v) { return {Kind::unattained, v}; }
  static Infimum unknown() { return {Kind::unknown, 0.0}; }
  bool known() const { return kind != Kind::unknown; }
};

/// f(x) = 0.5 x'Hx - b'x + c, kept alongside closed-form evaluators so that
/// linear solves (Tikhonov path, minimizer sets) stay exact.
struct QuadraticForm {
  Mat hessian;
  Vec linear;
  double constant = 0.0;
};

/// Smooth convex map R^n -> R with a hand-coded gradient.
struct ConvexFunction {
  int dim = 0;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  Infimum inf_value;
  double strong_convexity_modulus = 0.0;
  // Documentation-level bound, used only for step-size selection.
  double grad_lipschitz_on_unit_ball = 1.0;
  std::string name;
  std::optional<QuadraticForm> quadratic;
};

/// argmin set of Phi: a point, an affine subspace, empty, or unknown.
struct ArgminSet {
  enum class Kind { single_point, affine, empty, unknown };
  Kind kind = Kind::unknown;
  Vec anchor;  // the point itself, or an anchor of the affine set
  Mat basis;   // orthonormal columns spanning the affine directions

  static ArgminSet single_point(Vec p) {
    ArgminSet s;
    s.kind = Kind::single_point;
    s.anchor = std::move(p);
    return s;
  }
  static ArgminSet affine(Vec anchor, Mat basis) {
    ArgminSet s;
    s.kind = Kind::affine;
    s.anchor = std::move(anchor);
    s.basis = std::move(basis);
    return s;
  }
  static ArgminSet empty() {
    ArgminSet s;
    s.kind = Kind::empty;
    return s;
  }
  static ArgminSet unknown() { return {}; }

  bool projectable() const {
    return kind == Kind::single_point || kind == Kind::affine;
  }
};

/// Descriptor for one catalog function.
struct FunctionSpec {
  enum class Family { quadratic, least_squares, logsumexp_softplus, shifted_sqnorm };
  Family family = Family::quadratic;
  int dim = 0;   // quadratic / logsumexp_softplus
  int rows = 0;  // least_squares
  Mat matrix;    // Q (dim x dim) or A (rows x dim)
  Vec vector;    // b or c

  static FunctionSpec quadratic(Mat q, Vec b) {
    FunctionSpec s;
    s.family = Family::quadratic;
    s.dim = static_cast<int>(b.size());
    s.matrix = std::move(q);
    s.vector = std::move(b);
    return s;
  }
  static FunctionSpec least_squares(Mat a, Vec b) {
    FunctionSpec s;
    s.family = Family::least_squares;
    s.rows = static_cast<int>(a.rows());
    s.dim = static_cast<int>(a.cols());
    s.matrix = std::move(a);
    s.vector = std::move(b);
    return s;
  }
  static FunctionSpec logsumexp_softplus(int dim) {
    FunctionSpec s;
    s.family = Family::logsumexp_softplus;
    s.dim = dim;
    return s;
  }
  static FunctionSpec shifted_sqnorm(Vec c) {
    FunctionSpec s;
    s.family = Family::shifted_sqnorm;
    s.dim = static_cast<int>(c.size());
    s.vector = std::move(c);
    return s;
  }
};

struct ProblemSpec {
  FunctionSpec phi;
  FunctionSpec u;
  std::string name;
};

/// (Phi, U) pair with the known solution structure. Immutable after
/// construction; safe to share across concurrent runs.
struct ProblemInstance {
  ConvexFunction phi;
  ConvexFunction u;
  ArgminSet s_phi;
  std::optional<Vec> x_star;  // unique minimizer of U over R^n
  std::optional<Vec> p_star;  // unique minimizer of U over argmin Phi
  int dim = 0;
  std::string name;
};

namespace detail {

inline double softplus_neg(double x) {
  // log(1 + exp(-x)), stable for both signs of x
  return x > 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

inline double softplus_neg_grad(double x) {
  // d/dx log(1 + exp(-x)) = -1 / (1 + exp(x))
  return x > 0.0 ? -std::exp(-x) / (1.0 + std::exp(-x)) : -1.0 / (1.0 + std::exp(x));
}

struct EigenSplit {
  Vec eigenvalues;
  Mat eigenvectors;
  Mat null_basis;   // orthonormal, eigenvalue ~ 0
  double lambda_max = 0.0;
  double lambda_min_pos = 0.0;  // smallest strictly positive eigenvalue (0 if none)
};

inline EigenSplit split_psd(const Mat& h, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw InvalidSpec(what + ": eigendecomposition failed");
  EigenSplit out;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.lambda_max = out.eigenvalues.size() ? out.eigenvalues.maxCoeff() : 0.0;
  const double tol = 1e-10 * std::max(1.0, out.lambda_max);
  if (out.eigenvalues.size() && out.eigenvalues.minCoeff() < -tol)
    throw InvalidSpec(what + ": matrix is not positive semidefinite (pivot " +
                      fmt_g(out.eigenvalues.minCoeff()) + ")");
  int nnull = 0;
  for (int i = 0; i < out.eigenvalues.size(); ++i)
    if (out.eigenvalues[i] <= tol) ++nnull;
  out.null_basis.resize(h.rows(), nnull);
  int j = 0;
  for (int i = 0; i < out.eigenvalues.size(); ++i) {
    if (out.eigenvalues[i] <= tol)
      out.null_basis.col(j++) = out.eigenvectors.col(i);
    else if (out.lambda_min_pos == 0.0 || out.eigenvalues[i] < out.lambda_min_pos)
      out.lambda_min_pos = out.eigenvalues[i];
  }
  return out;
}

inline void require_symmetric(const Mat& q, const std::string& what) {
  const double scale = 1.0 + q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidSpec(what + ": matrix must be symmetric");
}

// Minimizer set of 0.5 x'Hx - b'x from the eigendecomposition. Throws if b
// is outside range(H), i.e. the quadratic is unbounded below.
inline std::pair<Vec, ArgminSet> quadratic_argmin(const EigenSplit& es, const Vec& b,
                                                  const std::string& what) {
  const double tol = 1e-10 * std::max(1.0, es.lambda_max);
  Vec xp = Vec::Zero(b.size());
  for (int i = 0; i < es.eigenvalues.size(); ++i) {
    if (es.eigenvalues[i] > tol) {
      const double proj = es.eigenvectors.col(i).dot(b);
      xp += (proj / es.eigenvalues[i]) * es.eigenvectors.col(i);
    }
  }
  // For least-squares instances H = A'A, b = A'r the normal equations are
  // always consistent; for raw quadratics they may not be.
  Mat h = es.eigenvectors * es.eigenvalues.asDiagonal() * es.eigenvectors.transpose();
  if ((h * xp - b).norm() > 1e-8 * (1.0 + b.norm()))
    throw InvalidSpec(what + ": unbounded below (linear term outside the range of the Hessian)");
  ArgminSet s = es.null_basis.cols() == 0
                    ? ArgminSet::single_point(xp)
                    : ArgminSet::affine(xp, es.null_basis);
  return {xp, s};
}

}  // namespace detail

struct CatalogEntry {
  ConvexFunction fn;
  ArgminSet argmin;
};

inline CatalogEntry make_catalog_function(const FunctionSpec& spec) {
  using Family = FunctionSpec::Family;
  CatalogEntry out;
  switch (spec.family) {
    case Family::quadratic: {
      if (spec.dim <= 0) throw InvalidSpec("quadratic: dimension must be positive");
      if (spec.matrix.rows() != spec.dim || spec.matrix.cols() != spec.dim ||
          spec.vector.size() != spec.dim)
        throw InvalidSpec("quadratic: dimension mismatch between Q and b");
      detail::require_symmetric(spec.matrix, "quadratic");
      auto es = detail::split_psd(spec.matrix, "quadratic");
      auto [xp, argmin] = detail::quadratic_argmin(es, spec.vector, "quadratic");
      const Mat q = spec.matrix;
      const Vec b = spec.vector;
      out.fn.dim = spec.dim;
      out.fn.eval = [q, b](const Vec& x) { return 0.5 * x.dot(q * x) - b.dot(x); };
      out.fn.grad = [q, b](const Vec& x) -> Vec { return q * x - b; };
      out.fn.inf_value = Infimum::attained(0.5 * xp.dot(q * xp) - b.dot(xp));
      out.fn.strong_convexity_modulus = es.null_basis.cols() == 0 ? es.lambda_min_pos : 0.0;
      out.fn.grad_lipschitz_on_unit_ball = std::max(es.lambda_max, 1e-12);
      out.fn.name = "quadratic";
      out.fn.quadratic = QuadraticForm{q, b, 0.0};
      out.argmin = argmin;
      break;
    }
    case Family::least_squares: {
      if (spec.dim <= 0 || spec.rows <= 0)
        throw InvalidSpec("least_squares: dimensions must be positive");
      if (spec.matrix.rows() != spec.rows || spec.matrix.cols() != spec.dim ||
          spec.vector.size() != spec.rows)
        throw InvalidSpec("least_squares: dimension mismatch between A and b");
      const Mat a = spec.matrix;
      const Vec b = spec.vector;
      const Mat h = a.transpose() * a;
      const Vec lin = a.transpose() * b;
      auto es = detail::split_psd(h, "least_squares");
      auto [xp, argmin] = detail::quadratic_argmin(es, lin, "least_squares");
      out.fn.dim = spec.dim;
      out.fn.eval = [a, b](const Vec& x) { return 0.5 * (a * x - b).squaredNorm(); };
      out.fn.grad = [a, b](const Vec& x) -> Vec { return a.transpose() * (a * x - b); };
      out.fn.inf_value = Infimum::attained(0.5 * (a * xp - b).squaredNorm());
      out.fn.strong_convexity_modulus = es.null_basis.cols() == 0 ? es.lambda_min_pos : 0.0;
      out.fn.grad_lipschitz_on_unit_ball = std::max(es.lambda_max, 1e-12);
      out.fn.name = "least_squares";
      out.fn.quadratic = QuadraticForm{h, lin, 0.5 * b.squaredNorm()};
      out.argmin = argmin;
      break;
    }
    case Family::logsumexp_softplus: {
      if (spec.dim <= 0) throw InvalidSpec("logsumexp_softplus: dimension must be positive");
      const int n = spec.dim;
      out.fn.dim = n;
      out.fn.eval = [](const Vec& x) {
        double s = 0.0;
        for (int i = 0; i < x.size(); ++i) s += detail::softplus_neg(x[i]);
        return s;
      };
      out.fn.grad = [](const Vec& x) -> Vec {
        Vec g(x.size());
        for (int i = 0; i < x.size(); ++i) g[i] = detail::softplus_neg_grad(x[i]);
        return g;
      };
      out.fn.inf_value = Infimum::unattained(0.0);
      out.fn.strong_convexity_modulus = 0.0;
      out.fn.grad_lipschitz_on_unit_ball = 0.25;
      out.fn.name = "logsumexp_softplus";
      out.argmin = ArgminSet::empty();
      break;
    }
    case Family::shifted_sqnorm: {
      if (spec.vector.size() == 0) throw InvalidSpec("shifted_sqnorm: dimension must be positive");
      const Vec c = spec.vector;
      const int n = static_cast<int>(c.size());
      out.fn.dim = n;
      out.fn.eval = [c](const Vec& x) { return 0.5 * (x - c).squaredNorm(); };
      out.fn.grad = [c](const Vec& x) -> Vec { return x - c; };
      out.fn.inf_value = Infimum::attained(0.0);
      out.fn.strong_convexity_modulus = 1.0;
      out.fn.grad_lipschitz_on_unit_ball = 1.0;
      out.fn.name = "shifted_sqnorm";
      out.fn.quadratic = QuadraticForm{Mat::Identity(n, n), c, 0.5 * c.squaredNorm()};
      out.argmin = ArgminSet::single_point(c);
      break;
    }
  }
  return out;
}

/// Euclidean projection onto argmin Phi. Only point and affine sets project.
inline Vec project_argmin(const ProblemInstance& p, const Vec& x) {
  if (x.size() != p.dim) throw InvalidSpec("project_argmin: dimension mismatch");
  switch (p.s_phi.kind) {
    case ArgminSet::Kind::single_point:
      return p.s_phi.anchor;
    case ArgminSet::Kind::affine:
      return p.s_phi.anchor + p.s_phi.basis * (p.s_phi.basis.transpose() * (x - p.s_phi.anchor));
    default:
      throw UnsupportedSet("project_argmin: minimizer set is empty or unknown");
  }
}

namespace detail {

// argmin of U over the affine set {anchor + B z} for quadratic U.
inline Vec restricted_minimizer(const QuadraticForm& u, const Vec& anchor, const Mat& basis) {
  if (basis.cols() == 0) return anchor;
  const Mat reduced = basis.transpose() * u.hessian * basis;
  const Vec rhs = basis.transpose() * (u.linear - u.hessian * anchor);
  return anchor + basis * reduced.ldlt().solve(rhs);
}

}  // namespace detail

inline ProblemInstance build_problem(const ProblemSpec& spec) {
  ProblemInstance p;
  auto phi_entry = make_catalog_function(spec.phi);
  auto u_entry = make_catalog_function(spec.u);
  if (phi_entry.fn.dim != u_entry.fn.dim)
    throw InvalidSpec("build_problem: Phi and U dimensions differ");
  p.phi = std::move(phi_entry.fn);
  p.u = std::move(u_entry.fn);
  p.s_phi = std::move(phi_entry.argmin);
  p.dim = p.phi.dim;
  p.name = spec.name.empty() ? p.phi.name + "/" + p.u.name : spec.name;

  if (p.u.strong_convexity_modulus > 0.0 && p.u.quadratic) {
    p.x_star = p.u.quadratic->hessian.ldlt().solve(p.u.quadratic->linear);
    if (p.u.grad(*p.x_star).norm() > 1e-8 * (1.0 + p.x_star->norm()))
      throw InvalidSpec("build_problem: computed x_star is not stationary for U");
    if (p.s_phi.kind == ArgminSet::Kind::single_point) {
      p.p_star = p.s_phi.anchor;
    } else if (p.s_phi.kind == ArgminSet::Kind::affine) {
      p.p_star = detail::restricted_minimizer(*p.u.quadratic, p.s_phi.anchor, p.s_phi.basis);
      const Vec residual = p.s_phi.basis.transpose() * p.u.grad(*p.p_star);
      if (residual.norm() > 1e-8 * (1.0 + p.p_star->norm()))
        throw InvalidSpec("build_problem: grad U at p_star is not orthogonal to argmin Phi");
    }
  }
  return p;
}

/// Max componentwise relative error between grad(x) and central differences.
inline double check_gradient(const ConvexFunction& f, const Vec& x, double h) {
  if (!(h > 0.0)) throw InvalidSpec("check_gradient: h must be positive");
  if (!x.allFinite()) throw InvalidSpec("check_gradient: x must be finite");
  const Vec g = f.grad(x);
  double worst = 0.0;
  Vec xp = x, xm = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double cd = (f.eval(xp) - f.eval(xm)) / (2.0 * h);
    worst = std::max(worst, std::abs(cd - g[i]) / (1.0 + std::abs(g[i])));
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return worst;
}

}  // namespace tikdyn

#endif
