#include "divfem/solvers.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <random>

#include "divfem/errors.hpp"

namespace divfem {

namespace {

using Op = std::function<Vector(const Vector&)>;

/// Lanczos with full reorthogonalization for an operator that is self-adjoint
/// in the inner product induced by `ip_mat` (x, y) -> x^T ip_mat y.
/// Returns Ritz values (ascending) and Ritz vectors.
struct LanczosOut {
  Vector theta;
  Eigen::MatrixXd vectors;
};

LanczosOut lanczos(const Op& op, const SpMat& ip_mat, int n, int m, std::uint64_t seed) {
  m = std::min(m, n);
  // V holds the Lanczos vectors, W the cached products ip_mat * V so that the
  // full reorthogonalization runs on dense dot products only.
  Eigen::MatrixXd V(n, m), W(n, m);
  Vector alpha(m), beta(m);
  std::mt19937_64 rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = double(rng() >> 11) * 0x1.0p-53 - 0.5;

  Vector iv = ip_mat * v;
  double nrm = std::sqrt(std::max(v.dot(iv), 0.0));
  if (!(nrm > 0.0)) throw SolverError("lanczos: degenerate start vector");
  v /= nrm;
  iv /= nrm;
  int actual = 0;
  for (int j = 0; j < m; ++j) {
    V.col(j) = v;
    W.col(j) = iv;
    Vector w = op(v);
    alpha(j) = w.dot(W.col(j));
    w -= alpha(j) * v;
    if (j > 0) w -= beta(j - 1) * V.col(j - 1);
    Vector iw = ip_mat * w;
    // full reorthogonalization (twice), keeping iw consistent with w
    for (int pass = 0; pass < 2; ++pass) {
      Vector c = W.leftCols(j + 1).transpose() * w;
      w -= V.leftCols(j + 1) * c;
      iw -= W.leftCols(j + 1) * c;
    }
    actual = j + 1;
    double b = std::sqrt(std::max(w.dot(iw), 0.0));
    if (b < 1e-14 * std::max(1.0, std::abs(alpha(j)))) break; // invariant subspace
    beta(j) = b;
    v = w / b;
    iv = iw / b;
  }

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(actual, actual);
  for (int j = 0; j < actual; ++j) {
    T(j, j) = alpha(j);
    if (j + 1 < actual) T(j, j + 1) = T(j + 1, j) = beta(j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  LanczosOut out;
  out.theta = es.eigenvalues();
  out.vectors = V.leftCols(actual) * es.eigenvectors();
  return out;
}

} // namespace

Vector solve_spd(const SpMat& A, const Vector& rhs) {
  Eigen::SimplicialLDLT<SpMat> chol(A);
  if (chol.info() != Eigen::Success) throw SolverError("solve_spd: factorization failed");
  return chol.solve(rhs);
}

SaddleSolution solve_stokes(const SpMat& A, const SpMat& B, const Vector& m, const Vector& f,
                            double epsilon) {
  if (epsilon <= 0.0) throw SolverError("solve_stokes: epsilon must be positive");
  const int nv = int(A.rows()), np = int(B.rows());
  if (B.cols() != nv || m.size() != np || f.size() != nv)
    throw SolverError("solve_stokes: dimension mismatch");
  const double e2 = epsilon * epsilon;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nonZeros() + 2 * B.nonZeros() + 2 * np);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      trips.emplace_back(int(it.row()), int(it.col()), e2 * it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      trips.emplace_back(nv + int(it.row()), int(it.col()), -it.value()); // -B
      trips.emplace_back(int(it.col()), nv + int(it.row()), -it.value()); // -B^T
    }
  for (int q = 0; q < np; ++q) {
    trips.emplace_back(nv + q, nv + np, -m(q));
    trips.emplace_back(nv + np, nv + q, -m(q));
  }
  SpMat S(nv + np + 1, nv + np + 1);
  S.setFromTriplets(trips.begin(), trips.end());
  S.makeCompressed();

  Eigen::SparseLU<SpMat> lu(S);
  if (lu.info() != Eigen::Success)
    throw SolverError("solve_stokes: singular saddle system (broken pair or mesh)");

  Vector rhs = Vector::Zero(nv + np + 1);
  rhs.head(nv) = f;
  Vector x = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) x += lu.solve(rhs - S * x);

  SaddleSolution sol;
  sol.u = x.head(nv);
  sol.p = x.segment(nv, np);
  double fs = std::max(f.norm(), 1e-300);
  sol.residual_momentum = (e2 * (A * sol.u) - B.transpose() * sol.p - f).norm() / fs;
  double us = std::max(sol.u.norm(), 1e-300);
  sol.residual_divergence = (B * sol.u).norm() / us;
  sol.pressure_mean = m.dot(sol.p);
  if (sol.residual_momentum > 1e-9)
    throw SolverError("solve_stokes: residual above tolerance after refinement");
  return sol;
}

EigenResult smallest_eigenpairs(const SpMat& A, const SpMat& M, int k, double epsilon,
                                int dense_threshold) {
  const int n = int(A.rows());
  if (k < 1 || k > n) throw SolverError("smallest_eigenpairs: bad k");
  const double e2 = epsilon * epsilon;
  EigenResult res;

  if (n <= dense_threshold) {
    Eigen::MatrixXd Ad = Eigen::MatrixXd(A), Md = Eigen::MatrixXd(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Ad, Md);
    if (es.info() != Eigen::Success) throw SolverError("smallest_eigenpairs: dense solve failed");
    res.values = e2 * es.eigenvalues().head(k);
    res.vectors = es.eigenvectors().leftCols(k);
    res.dense_path = true;
  } else {
    Eigen::SimplicialLDLT<SpMat> chol(A);
    if (chol.info() != Eigen::Success)
      throw SolverError("smallest_eigenpairs: stiffness factorization failed");
    Op op = [&](const Vector& x) -> Vector {
      Vector rhs = M * x;
      return chol.solve(rhs);
    };
    int m = std::min(n, std::max(4 * k + 60, 120));
    const int budget = 5000;
    for (int attempt = 0;; ++attempt) {
      LanczosOut lz = lanczos(op, M, n, m, 20240901u);
      if (int(lz.theta.size()) < k)
        throw SolverError("smallest_eigenpairs: Krylov space smaller than k");
      res.values.resize(k);
      res.vectors.resize(n, k);
      int last = int(lz.theta.size()) - 1;
      for (int i = 0; i < k; ++i) {
        double th = lz.theta(last - i);
        if (!(th > 0.0)) throw SolverError("smallest_eigenpairs: nonpositive Ritz value");
        res.values(i) = e2 / th;
        res.vectors.col(i) = lz.vectors.col(last - i);
        res.vectors.col(i) /= res.vectors.col(i).norm();
      }
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        Vector x = res.vectors.col(i);
        Vector ax = e2 * (A * x);
        worst = std::max(worst, (ax - res.values(i) * (M * x)).norm() /
                                    std::max(ax.norm(), 1e-300));
      }
      if (worst <= 1e-8 || attempt == 2 || 3 * m > budget) break;
      m = std::min(n, 3 * m);
    }
  }

  res.residuals.resize(k);
  for (int i = 0; i < k; ++i) {
    Vector x = res.vectors.col(i);
    Vector ax = e2 * (A * x), mx = M * x;
    res.residuals(i) = (ax - res.values(i) * mx).norm() / std::max(ax.norm(), 1e-300);
    if (res.residuals(i) > 1e-8)
      throw SolverError("smallest_eigenpairs: eigen residual above 1e-8");
  }
  return res;
}

namespace {

InfSupReport infsup_dense(const SpMat& A, const SpMat& B, const SpMat& Mp) {
  const int np = int(B.rows());
  Eigen::SimplicialLDLT<SpMat> chol(A);
  if (chol.info() != Eigen::Success)
    throw SolverError("infsup_constant: velocity stiffness factorization failed");
  Eigen::MatrixXd Bt = Eigen::MatrixXd(SpMat(B.transpose()));
  Eigen::MatrixXd X = chol.solve(Bt);
  Eigen::MatrixXd S = Bt.transpose() * X;
  S = 0.5 * (S + S.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(Mp));
  if (es.info() != Eigen::Success) throw SolverError("infsup_constant: dense eigensolve failed");
  const auto& ev = es.eigenvalues();

  InfSupReport rep;
  rep.dense_path = true;
  rep.lambda_max = ev(np - 1);
  const double cut = std::max(1e-12, 1e-8 * std::abs(rep.lambda_max));
  for (int i = 0; i < np; ++i) {
    if (ev(i) > cut) {
      rep.lambda_min_plus = ev(i);
      rep.deflated = i;
      break;
    }
  }
  if (rep.lambda_min_plus <= 0.0)
    throw SolverError("infsup_constant: no positive eigenvalue found");
  rep.beta = std::sqrt(rep.lambda_min_plus);
  rep.beta_max = std::sqrt(rep.lambda_max);
  return rep;
}

/// One shift-invert sweep on the velocity-side pencil K u = lambda A u.
/// Returns (lambda just above sigma, lambda just below sigma or -1, residual).
struct SweepOut {
  double above = -1.0, below = -1.0, residual = 1.0;
};

SweepOut shift_invert_sweep(const SpMat& K, const SpMat& A, double sigma, int m) {
  SpMat shifted = K - sigma * A;
  shifted.makeCompressed();
  Eigen::SparseLU<SpMat> lu(shifted);
  if (lu.info() != Eigen::Success) throw SolverError("infsup_constant: shifted factorization failed");
  Op op = [&](const Vector& x) -> Vector {
    Vector rhs = A * x;
    return lu.solve(rhs);
  };
  LanczosOut lz = lanczos(op, A, int(A.rows()), m, 987654321u);
  const int cnt = int(lz.theta.size());

  SweepOut out;
  auto residual_of = [&](const Vector& x, double lam) {
    Vector kx = K * x, ax = A * x;
    return (kx - lam * ax).norm() / std::max(kx.norm() + std::abs(lam) * ax.norm(), 1e-300);
  };
  double th_max = lz.theta(cnt - 1), th_min = lz.theta(0);
  if (th_max > 0.0) {
    out.above = sigma + 1.0 / th_max;
    out.residual = residual_of(lz.vectors.col(cnt - 1), out.above);
  }
  if (th_min < 0.0) out.below = sigma + 1.0 / th_min;
  return out;
}

} // namespace

InfSupReport infsup_constant(const SpMat& A, const SpMat& B, const SpMat& Mp, double sigma_hint,
                             int dense_threshold) {
  const int np = int(B.rows());
  if (B.cols() != A.rows() || Mp.rows() != np) throw SolverError("infsup_constant: dimension mismatch");
  if (np <= dense_threshold) return infsup_dense(A, B, Mp);

  // Velocity-side pencil: K = B^T Mp^{-1} B against A. Mp is diagonal (P0) or
  // 3x3 block diagonal (P1).
  SpMat Mpinv(np, np);
  {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::MatrixXd dense = Eigen::MatrixXd(Mp);
    // detect block size by sparsity: P0 mass is diagonal
    bool diagonal = true;
    for (int k = 0; k < Mp.outerSize() && diagonal; ++k)
      for (SpMat::InnerIterator it(Mp, k); it; ++it)
        if (it.row() != it.col()) diagonal = false;
    if (diagonal) {
      for (int i = 0; i < np; ++i) trips.emplace_back(i, i, 1.0 / dense(i, i));
    } else {
      if (np % 3 != 0) throw SolverError("infsup_constant: unsupported pressure mass layout");
      for (int b = 0; b < np / 3; ++b) {
        Eigen::Matrix3d blk = dense.block<3, 3>(3 * b, 3 * b).inverse();
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) trips.emplace_back(3 * b + i, 3 * b + j, blk(i, j));
      }
    }
    Mpinv.setFromTriplets(trips.begin(), trips.end());
  }
  SpMat K = B.transpose() * Mpinv * B;
  K.makeCompressed();

  InfSupReport rep;
  rep.dense_path = false;

  // lambda_max: shift above the spectrum (||div v||^2 <= 2 |v|_1^2 gives
  // lambda <= 2).
  {
    const double sig_hi = 2.25;
    SpMat shifted = K - sig_hi * A;
    Eigen::SparseLU<SpMat> lu(shifted);
    if (lu.info() != Eigen::Success)
      throw SolverError("infsup_constant: high-shift factorization failed");
    Op op = [&](const Vector& x) -> Vector {
      Vector rhs = A * x;
      return lu.solve(rhs);
    };
    LanczosOut lz = lanczos(op, A, int(A.rows()), std::min<int>(int(A.rows()), 120), 13579u);
    double th_min = lz.theta(0);
    if (!(th_min < 0.0)) throw SolverError("infsup_constant: lambda_max sweep failed");
    rep.lambda_max = sig_hi + 1.0 / th_min;
    Vector x = lz.vectors.col(0);
    Vector kx = K * x, ax = A * x;
    rep.residual = (kx - rep.lambda_max * ax).norm() /
                   std::max(kx.norm() + rep.lambda_max * ax.norm(), 1e-300);
  }

  // lambda_min_plus: shift below the smallest nonzero eigenvalue; validate the
  // shift by checking that nothing but exact zeros lies below it.
  double sigma = sigma_hint > 0.0 ? sigma_hint : 1e-3;
  const int budget = 5000;
  int spent = 0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    int m = std::min<int>(int(A.rows()), 220);
    if (spent + m > budget) throw SolverError("infsup_constant: iteration budget exhausted");
    spent += m;
    SweepOut sw;
    try {
      sw = shift_invert_sweep(K, A, sigma, m);
    } catch (const SolverError&) {
      sigma *= 0.7; // sigma collided with an eigenvalue
      continue;
    }
    const double zero_cut = std::max(1e-11, 1e-5 * sigma);
    if (sw.below > zero_cut) {
      // a genuine positive eigenvalue sits below sigma: lower the shift
      sigma = 0.25 * sw.below;
      continue;
    }
    if (sw.above <= 0.0) {
      sigma *= 0.5;
      continue;
    }
    if (sw.residual > 1e-8) {
      // not converged: enlarge the Krylov space once, then give up
      int m2 = std::min<int>(int(A.rows()), 500);
      if (spent + m2 > budget) throw SolverError("infsup_constant: iteration budget exhausted");
      spent += m2;
      SweepOut sw2 = shift_invert_sweep(K, A, sigma, m2);
      if (sw2.residual > 1e-8)
        throw SolverError("infsup_constant: eigen residual above 1e-8");
      sw = sw2;
    }
    rep.lambda_min_plus = sw.above;
    rep.beta = std::sqrt(rep.lambda_min_plus);
    rep.beta_max = std::sqrt(rep.lambda_max);
    rep.residual = std::max(rep.residual, sw.residual);
    return rep;
  }
  throw SolverError("infsup_constant: could not locate lambda_min_plus");
}

} // namespace divfem
