#pragma once

#include "jbessel/jordan_pair.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace jb {

struct IdentityRecord {
  std::string name;
  std::string anchor;
  double residual = 0;
  double tolerance = 0;
  bool applicable = true;
  std::string note;
  bool pass() const { return !applicable || residual <= tolerance; }
};

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> random_element(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
  for (int i = 0; i < n; ++i) v(i) = Scalar(g(rng));
  return v / std::sqrt(Scalar(n));
}

// Dual basis in V^- (columns) to the columns of C spanning a subspace of V^+,
// taken inside the V^- subspace spanned by W.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dual_in(
    const JordanPair<Scalar>& J, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& W) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat M = C.transpose() * J.gram() * W;
  return W * M.inverse();
}

// Sum over a basis of D_{c, c^} as an operator on V+.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> basis_d_sum(
    const JordanPair<Scalar>& J, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Chat) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat S = Mat::Zero(J.dim(), J.dim());
  for (int a = 0; a < C.cols(); ++a) S += J.D(Side::plus, C.col(a), Chat.col(a));
  return S;
}

template <typename Scalar>
std::vector<IdentityRecord> identity_suite(const JordanPair<Scalar>& J, int probes, std::uint64_t seed,
                                           double tol = 1e-9) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = J.dim();
  const auto& c = J.constants();
  std::mt19937_64 rng(seed);
  std::vector<IdentityRecord> out;
  auto rel = [](Scalar num, Scalar scale) {
    return static_cast<double>(num / std::max(Scalar(1e-300), scale));
  };

  double jp7 = 0, jp8 = 0, jp16 = 0, fund = 0, sym = 0, pos_min = 1e300;
  for (int t = 0; t < probes; ++t) {
    Vec x = random_element<Scalar>(n, rng), z = random_element<Scalar>(n, rng), u = random_element<Scalar>(n, rng);
    Vec y = random_element<Scalar>(n, rng), v = random_element<Scalar>(n, rng);
    {
      Mat a = J.D(Side::plus, J.triple(Side::plus, x, y, z), y);
      Mat b = J.D(Side::plus, z, J.quad(Side::minus, y, x));
      Mat d = J.D(Side::plus, x, J.quad(Side::minus, y, z));
      jp7 = std::max(jp7, rel((a - b - d).norm(), a.norm() + b.norm() + d.norm()));
    }
    {
      // x in V+, y,z in V-
      Mat a = J.D(Side::plus, x, J.triple(Side::minus, y, x, v));
      Mat b = J.D(Side::plus, J.quad(Side::plus, x, y), v);
      Mat d = J.D(Side::plus, J.quad(Side::plus, x, v), y);
      jp8 = std::max(jp8, rel((a - b - d).norm(), a.norm() + b.norm() + d.norm()));
    }
    {
      Vec l1 = J.triple(Side::plus, J.triple(Side::plus, x, y, u), v, z);
      Vec l2 = J.triple(Side::plus, u, J.triple(Side::minus, y, x, v), z);
      Vec r1 = J.triple(Side::plus, x, J.triple(Side::minus, v, u, y), z);
      Vec r2 = J.triple(Side::plus, J.triple(Side::plus, u, v, x), y, z);
      jp16 = std::max(jp16, rel((l1 - l2 - r1 + r2).norm(), l1.norm() + l2.norm() + r1.norm() + r2.norm()));
    }
    {
      Mat a = J.Q(Side::plus, J.quad(Side::plus, x, y));
      Mat b = J.Q(Side::plus, x) * J.Q(Side::minus, y) * J.Q(Side::plus, x);
      fund = std::max(fund, rel((a - b).norm(), a.norm() + b.norm()));
    }
    {
      Vec a = J.triple(Side::plus, x, y, z), b = J.triple(Side::plus, z, y, x);
      sym = std::max(sym, rel((a - b).norm(), a.norm() + b.norm()));
    }
    {
      Vec yy = Scalar(0.8) * y;
      Mat B = J.bergman(Side::plus, -J.theta(yy), yy);
      Mat F = B.transpose() * J.gram() * J.theta_matrix();
      Mat Fs = Scalar(0.5) * (F + F.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(Fs);
      pos_min = std::min(pos_min, static_cast<double>(es.eigenvalues()(0)));
    }
  }
  out.push_back({"JP7", "D_{{x,y,z},y} = D_{z,Q_y x} + D_{x,Q_y z}", jp7, tol});
  out.push_back({"JP8", "D_{x,{y,x,z}} = D_{Q_x y,z} + D_{Q_x z,y}", jp8, tol});
  out.push_back({"JP16", "{{x,y,u},v,z} - {u,{y,x,v},z} = {x,{v,u,y},z} - {{u,v,x},y,z}", jp16, tol});
  out.push_back({"fundamental_formula", "Q_{Q_x y} = Q_x Q_y Q_x", fund, tol});
  out.push_back({"triple_symmetry", "{x,y,z} = {z,y,x}", sym, tol});
  {
    IdentityRecord r{"bergman_positivity", "B_{-conj y,y} positive definite for the trace form", 0, 0};
    r.residual = pos_min > 0 ? 0.0 : -pos_min;
    r.note = "minimum eigenvalue " + std::to_string(pos_min);
    out.push_back(r);
  }

  // Dual-basis sum over the full space.
  {
    Mat C = Mat::Identity(n, n);
    Mat S = basis_d_sum(J, C, J.dual_basis());
    Scalar two_p = 2 * c.p;
    out.push_back({"basessums_full", "sum D_{c,c^} = 2p id", rel((S - two_p * Mat::Identity(n, n)).norm(), two_p), tol});
  }

  const int r = c.r;
  for (int k = 1; k <= r; ++k) {
    Vec e = J.frame_sum(k);
    Vec ep = J.theta(e);
    auto pd = J.peirce(e, ep);
    Mat C2 = range_basis<Scalar>(pd.P2), W2 = range_basis<Scalar>(pd.P2m);
    Mat C1 = range_basis<Scalar>(pd.P1), W1 = range_basis<Scalar>(pd.P1m);
    Mat C2h = dual_in(J, C2, W2);
    const std::string ks = "k=" + std::to_string(k);
    // Genus of the Peirce-2 and Peirce-0 sub-pairs from traces of D_{e_i, conj e_i}.
    Scalar p2 = (pd.P2 * J.D(Side::plus, J.frame()[0], J.theta(J.frame()[0]))).trace() / 2;
    Scalar p0 = 0;
    if (k < r) p0 = (pd.P0 * J.D(Side::plus, J.frame()[k], J.theta(J.frame()[k]))).trace() / 2;
    {
      Mat S = basis_d_sum(J, C2, C2h);
      Mat De = J.D(Side::plus, e, ep);
      out.push_back({"basessums_V2_" + ks, "sum_{I2} D = p2 D_{e,e'}", rel((S - p2 * De).norm(), p2 * De.norm()), tol});
    }
    if (C1.cols() > 0) {
      Mat C1h = dual_in(J, C1, W1);
      Mat S = basis_d_sum(J, C1, C1h);
      Scalar on2 = 2 * (r - k) * c.d + c.b;
      Scalar on0 = 2 * k * c.d;
      Scalar on1 = r * c.d + c.b / 2;
      Scalar sc = std::max(Scalar(1), S.norm());
      out.push_back({"basessums_I1_on_V2_" + ks, "sum_{I1} D |V2 = (2(r-k)d+b) id",
                     rel((S * pd.P2 - on2 * pd.P2).norm(), sc), tol});
      if (k < r)
        out.push_back({"basessums_I1_on_V0_" + ks, "sum_{I1} D |V0 = 2kd id", rel((S * pd.P0 - on0 * pd.P0).norm(), sc), tol});
      IdentityRecord r3{"basessums_I1_on_V1_" + ks, "sum_{I1} D |V1 = (rd+b/2) id", rel((S * pd.P1 - on1 * pd.P1).norm(), sc), tol};
      if (J.spec().is_rect_exception()) {
        r3.applicable = false;
        r3.note = "hypothesis excludes rectangular pairs with p != q";
      }
      out.push_back(r3);
      if (k < r) {
        // sum_{a,b in I1} Q_{c_a,c_b} Q_{c^_a,c^_b} on V2+
        Mat T = Mat::Zero(n, n);
        for (int a = 0; a < C1.cols(); ++a)
          for (int b = 0; b < C1.cols(); ++b)
            T += J.Q2(Side::plus, C1.col(a), C1.col(b)) * J.Q2(Side::minus, C1h.col(a), C1h.col(b));
        Scalar target = 2 * p0 * (c.p - p2);
        Mat diff = T * pd.P2 - target * pd.P2;
        IdentityRecord r4{"basessums2_" + ks, "sum_{I1} Q_{c_a,c_b} Q_{c^_a,c^_b} |V2 = 2 p0 (p - p2) id",
                          rel(diff.norm(), std::max(Scalar(1), target * pd.P2.norm())), tol};
        Eigen::SelfAdjointEigenSolver<Mat> es(Scalar(0.5) * (C2.transpose() * T * C2 + (C2.transpose() * T * C2).transpose()));
        r4.note = "measured eigenvalue range [" + std::to_string(static_cast<double>(es.eigenvalues().minCoeff())) + ", " +
                  std::to_string(static_cast<double>(es.eigenvalues().maxCoeff())) + "], stated " +
                  std::to_string(static_cast<double>(target));
        out.push_back(r4);
      }
    }
  }
  return out;
}

}  // namespace jb
