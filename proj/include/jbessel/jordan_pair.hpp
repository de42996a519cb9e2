#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jb {

enum class Family { sym, herm_c, spin, rect };
enum class Side { plus, minus };

inline Side opposite(Side s) { return s == Side::plus ? Side::minus : Side::plus; }

struct AlgebraSpec {
  Family family = Family::sym;
  int a = 1;  // r for sym/herm_c, n for spin, p for rect
  int b = 0;  // q for rect

  // Grammar: sym:R, herm_c:R, spin:N, rect:PxQ (case-insensitive).
  static AlgebraSpec parse(const std::string& text);
  std::string str() const;
  // Rectangular pairs with p != q are the only non-unital family here.
  bool is_rect_exception() const { return family == Family::rect && a != b; }
};

class JordanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Singular values fell inside the ambiguous band of the rank policy.
class RankAmbiguous : public JordanError {
 public:
  using JordanError::JordanError;
};

// The continuation of the pair determinant met a zero of Det B.
class BranchError : public JordanError {
 public:
  using JordanError::JordanError;
};

template <typename Scalar>
struct StructureConstants {
  int r = 0;
  Scalar d_plus = 0, d_minus = 0, d = 0, e = 0, b = 0, p = 0;
  // Tr D_{e1, conj e1} / 2, an independent reading of the genus.
  Scalar p_trace = 0;
  bool unital = true;
};

template <typename Scalar>
struct Idempotent {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e, e_prime;
  int rank = 0;
};

template <typename Scalar>
struct PeirceDecomposition {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat P2, P1, P0;     // on V+
  Mat P2m, P1m, P0m;  // on V-
  int dim2 = 0, dim1 = 0, dim0 = 0;
  Scalar clustering = 0;  // max ||D P_j - j P_j||
};

template <typename Scalar>
struct BergmanDecomposition {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Vec y_x;  // y^x in V-
  Vec x_y;  // x^y in V+
  Mat B_xy;
  Mat B_yx_inv;
};

template <typename Scalar>
struct Spectral {
  std::vector<Scalar> values;  // descending
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> idempotents;
};

template <typename Scalar>
class JordanPair {
 public:
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

  explicit JordanPair(const AlgebraSpec& spec, int max_dim = 64);

  const AlgebraSpec& spec() const { return spec_; }
  int dim() const { return n_; }
  int rank() const { return constants_.r; }
  const StructureConstants<Scalar>& constants() const { return constants_; }

  // {x,y,z} with x,z in V^s and y in V^{-s}.
  Vec triple(Side s, const Vec& x, const Vec& y, const Vec& z) const;
  Vec quad(Side s, const Vec& x, const Vec& y) const { return Scalar(0.5) * triple(s, x, y, x); }
  // z -> {x,y,z} on V^s.
  Mat D(Side s, const Vec& x, const Vec& y) const;
  // y -> {x,y,z} from V^{-s} to V^s; Q(s,x) = Q2(s,x,x)/2.
  Mat Q2(Side s, const Vec& x, const Vec& z) const;
  Mat Q(Side s, const Vec& x) const { return Scalar(0.5) * Q2(s, x, x); }
  Mat bergman(Side s, const Vec& x, const Vec& y) const;

  const Mat& theta_matrix() const { return theta_; }
  Vec theta(const Vec& x) const { return theta_ * x; }
  const Mat& gram() const { return gram_; }
  const Mat& gram_inverse() const { return gram_inv_; }
  Scalar tau(const Vec& x_plus, const Vec& y_minus) const { return x_plus.dot(gram_ * y_minus); }
  // (x|y) = tau(x, conj y) on V+.
  Scalar inner(const Vec& x, const Vec& y) const { return tau(x, theta(y)); }
  // Columns are the dual basis of V- to the coordinate basis of V+.
  const Mat& dual_basis() const { return gram_inv_; }

  const std::vector<Vec>& frame() const { return frame_; }
  Vec frame_sum(int k) const;
  Vec b_t(const std::vector<Scalar>& t) const;

  Vec jordan_product(const Vec& unit, const Vec& x, const Vec& y) const {
    return Scalar(0.5) * triple(Side::plus, x, theta(unit), y);
  }
  // Spectral values and idempotents of a inside the Jordan algebra V_2(unit).
  Spectral<Scalar> spectral(const Vec& unit, const Vec& a, Scalar tol = Scalar(1e-9)) const;

  PeirceDecomposition<Scalar> peirce(const Vec& e, const Vec& e_prime) const;
  // Projector onto V_ij (1 <= i <= j <= r) or V_i0 (j == 0) of the frame.
  Mat joint_projector(int i, int j) const;
  // (I + sign*sigma)/2 with sigma(x) = Q_e conj x, e the full frame sum.
  Mat frame_involution() const;
  // Peirce-2 dimension of a rank-k idempotent.
  int peirce2_dim(int k) const;
  Scalar p2_of(int k) const { return constants_.e + 1 + (k - 1) * constants_.d; }
  Scalar p0_of(int k) const {
    if (k >= constants_.r) return 0;
    return constants_.e + 1 + (constants_.r - k - 1) * constants_.d + constants_.b / 2;
  }

  Idempotent<Scalar> complete_idempotent(const Vec& e) const;
  int rank_of(const Vec& x) const;

  Scalar det_bergman(const Vec& x, const Vec& y) const { return bergman(Side::plus, x, y).determinant(); }
  Scalar pair_det(const Vec& x, const Vec& y, int steps = 64) const;
  BergmanDecomposition<Scalar> bergman_decompose(const Vec& x, const Vec& y, Scalar cond_cap = Scalar(1e12)) const;

  // Inverse of x inside the Peirce-2 pair of an idempotent (e, e'), as an element of V_2^-.
  Vec peirce2_inverse(const Vec& x2, const PeirceDecomposition<Scalar>& pd) const;

  // Dense cache: entry a*n+c is the matrix of y -> {basis_a, y, basis_c}; only for n <= 32.
  std::vector<Mat> triple_tensor(Side s) const;

  // Matrix view of V+ coordinates (a column vector for spin factors).
  CMat to_complex(const Vec& v) const;
  Vec from_complex(const CMat& m) const;
  // Radial coordinates t with x in the (M cap K)-orbit of b_t, descending, length r.
  std::vector<Scalar> singular_values(const Vec& x) const;
  int spin_split() const { return spec_.family == Family::spin ? spec_.a / 2 : 0; }

 private:
  AlgebraSpec spec_;
  int n_ = 0;
  int rows_ = 0, cols_ = 0;  // matrix shape of V+ elements
  std::vector<std::pair<int, int>> index_;
  std::vector<int> kind_;  // 0 diagonal, 1 symmetric off-diagonal, 2 skew imaginary
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> signature_;  // spin only
  Mat theta_, gram_, gram_inv_;
  std::vector<Vec> frame_;
  StructureConstants<Scalar> constants_;

  Mat to_real(Side s, const Vec& v) const;
  Vec from_real(Side s, const Mat& m) const;
  void build_coordinates();
  void build_frame();
  void build_constants();
};

// Orthonormal basis (columns) of the range of a projector-like matrix.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> range_basis(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& P, Scalar tol = Scalar(1e-9)) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int m = 0;
  Scalar smax = s.size() ? s(0) : Scalar(0);
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol * std::max(Scalar(1), smax)) ++m;
  return svd.matrixU().leftCols(m);
}

// ---------------------------------------------------------------------------

template <typename Scalar>
JordanPair<Scalar>::JordanPair(const AlgebraSpec& spec, int max_dim) : spec_(spec) {
  switch (spec_.family) {
    case Family::sym:
    case Family::herm_c:
      if (spec_.a < 1) throw JordanError("sym/herm_c require r >= 1");
      break;
    case Family::spin:
      if (spec_.a < 3) throw JordanError("spin requires n >= 3");
      break;
    case Family::rect:
      if (spec_.a < 1 || spec_.b < 1) throw JordanError("rect requires p,q >= 1");
      break;
  }
  build_coordinates();
  if (n_ > max_dim)
    throw JordanError("dimension " + std::to_string(n_) + " exceeds configured maximum " + std::to_string(max_dim));
  build_frame();
  build_constants();
}

template <typename Scalar>
void JordanPair<Scalar>::build_coordinates() {
  const int R = spec_.a;
  index_.clear();
  kind_.clear();
  switch (spec_.family) {
    case Family::sym:
      rows_ = cols_ = R;
      for (int i = 0; i < R; ++i) index_.push_back({i, i}), kind_.push_back(0);
      for (int i = 0; i < R; ++i)
        for (int j = i + 1; j < R; ++j) index_.push_back({i, j}), kind_.push_back(1);
      break;
    case Family::herm_c:
      rows_ = cols_ = R;
      for (int i = 0; i < R; ++i) index_.push_back({i, i}), kind_.push_back(0);
      for (int i = 0; i < R; ++i)
        for (int j = i + 1; j < R; ++j) {
          index_.push_back({i, j}), kind_.push_back(1);
          index_.push_back({i, j}), kind_.push_back(2);
        }
      break;
    case Family::spin: {
      rows_ = spec_.a, cols_ = 1;
      int pos = spec_.a / 2;
      signature_ = Vec::Constant(spec_.a, Scalar(-1));
      signature_.head(pos).setConstant(Scalar(1));
      for (int i = 0; i < spec_.a; ++i) index_.push_back({i, 0}), kind_.push_back(0);
      break;
    }
    case Family::rect:
      rows_ = spec_.a, cols_ = spec_.b;
      for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) index_.push_back({i, j}), kind_.push_back(0);
      break;
  }
  n_ = static_cast<int>(index_.size());
  theta_ = Mat::Identity(n_, n_);
  if (spec_.family == Family::spin) theta_ = signature_.asDiagonal();
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::to_real(Side s, const Vec& v) const {
  const Scalar r2 = std::sqrt(Scalar(2));
  if (spec_.family == Family::rect) {
    Mat m = (s == Side::plus) ? Mat::Zero(rows_, cols_) : Mat::Zero(cols_, rows_);
    for (int a = 0; a < n_; ++a) {
      auto [i, j] = index_[a];
      if (s == Side::plus)
        m(i, j) = v(a);
      else
        m(j, i) = v(a);
    }
    return m;
  }
  Mat m = Mat::Zero(rows_, cols_);
  for (int a = 0; a < n_; ++a) {
    auto [i, j] = index_[a];
    if (kind_[a] == 0)
      m(i, j) = v(a);
    else {
      m(i, j) = v(a) / r2;
      m(j, i) = v(a) / r2;
    }
  }
  return m;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::from_real(Side s, const Mat& m) const {
  const Scalar r2 = std::sqrt(Scalar(2));
  Vec v(n_);
  for (int a = 0; a < n_; ++a) {
    auto [i, j] = index_[a];
    if (spec_.family == Family::rect)
      v(a) = (s == Side::plus) ? m(i, j) : m(j, i);
    else if (kind_[a] == 0)
      v(a) = m(i, j);
    else
      v(a) = (m(i, j) + m(j, i)) / r2;
  }
  return v;
}

template <typename Scalar>
typename JordanPair<Scalar>::CMat JordanPair<Scalar>::to_complex(const Vec& v) const {
  using C = std::complex<Scalar>;
  const Scalar r2 = std::sqrt(Scalar(2));
  CMat m = CMat::Zero(rows_, cols_);
  for (int a = 0; a < n_; ++a) {
    auto [i, j] = index_[a];
    if (kind_[a] == 0)
      m(i, j) += C(v(a), 0);
    else if (kind_[a] == 1) {
      m(i, j) += C(v(a) / r2, 0);
      m(j, i) += C(v(a) / r2, 0);
    } else {
      m(i, j) += C(0, v(a) / r2);
      m(j, i) -= C(0, v(a) / r2);
    }
  }
  return m;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::from_complex(const CMat& m) const {
  const Scalar r2 = std::sqrt(Scalar(2));
  Vec v(n_);
  for (int a = 0; a < n_; ++a) {
    auto [i, j] = index_[a];
    if (kind_[a] == 0)
      v(a) = m(i, j).real();
    else if (kind_[a] == 1)
      v(a) = (m(i, j).real() + m(j, i).real()) / r2;
    else
      v(a) = (m(i, j).imag() - m(j, i).imag()) / r2;
  }
  return v;
}

template <typename Scalar>
std::vector<Scalar> JordanPair<Scalar>::singular_values(const Vec& x) const {
  std::vector<Scalar> t;
  if (spec_.family == Family::spin) {
    const int a = spin_split();
    Scalar up = x.head(a).norm(), dn = x.tail(n_ - a).norm();
    const Scalar r2 = std::sqrt(Scalar(2));
    t = {(up + dn) / r2, std::abs(up - dn) / r2};
  } else {
    Eigen::JacobiSVD<CMat> svd(to_complex(x));
    const auto& s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) t.push_back(s(i));
  }
  std::sort(t.begin(), t.end(), std::greater<Scalar>());
  return t;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::triple(Side s, const Vec& x, const Vec& y,
                                                            const Vec& z) const {
  switch (spec_.family) {
    case Family::spin: {
      auto q = [&](const Vec& u, const Vec& w) { return u.dot(signature_.cwiseProduct(w)); };
      return q(x, y) * z + q(z, y) * x - q(x, z) * y;
    }
    case Family::herm_c: {
      CMat X = to_complex(x), Y = to_complex(y), Z = to_complex(z);
      return from_complex(X * Y * Z + Z * Y * X);
    }
    default: {
      Side o = opposite(s);
      Mat X = to_real(s, x), Y = to_real(o, y), Z = to_real(s, z);
      return from_real(s, X * Y * Z + Z * Y * X);
    }
  }
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::D(Side s, const Vec& x, const Vec& y) const {
  Mat m(n_, n_);
  Vec unit = Vec::Zero(n_);
  for (int c = 0; c < n_; ++c) {
    unit.setZero();
    unit(c) = 1;
    m.col(c) = triple(s, x, y, unit);
  }
  return m;
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::Q2(Side s, const Vec& x, const Vec& z) const {
  Mat m(n_, n_);
  Vec unit = Vec::Zero(n_);
  for (int c = 0; c < n_; ++c) {
    unit.setZero();
    unit(c) = 1;
    m.col(c) = triple(s, x, unit, z);
  }
  return m;
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::bergman(Side s, const Vec& x, const Vec& y) const {
  return Mat::Identity(n_, n_) - D(s, x, y) + Q(s, x) * Q(opposite(s), y);
}

template <typename Scalar>
std::vector<typename JordanPair<Scalar>::Mat> JordanPair<Scalar>::triple_tensor(Side s) const {
  if (n_ > 32) throw JordanError("triple tensor cache is limited to n <= 32");
  std::vector<Mat> out(static_cast<size_t>(n_) * n_);
  Vec ea = Vec::Zero(n_), ec = Vec::Zero(n_);
  for (int a = 0; a < n_; ++a) {
    ea.setZero();
    ea(a) = 1;
    for (int c = 0; c < n_; ++c) {
      ec.setZero();
      ec(c) = 1;
      out[static_cast<size_t>(a) * n_ + c] = Q2(s, ea, ec);
    }
  }
  return out;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::frame_sum(int k) const {
  Vec s = Vec::Zero(n_);
  for (int i = 0; i < k && i < static_cast<int>(frame_.size()); ++i) s += frame_[i];
  return s;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::b_t(const std::vector<Scalar>& t) const {
  if (t.size() > frame_.size()) throw JordanError("b_t: more coordinates than the rank");
  Vec s = Vec::Zero(n_);
  for (size_t i = 0; i < t.size(); ++i) s += t[i] * frame_[i];
  return s;
}

template <typename Scalar>
Spectral<Scalar> JordanPair<Scalar>::spectral(const Vec& unit, const Vec& a, Scalar tol) const {
  std::vector<Vec> powers{unit};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeffs;
  int m = 0;
  Scalar scale = std::max(Scalar(1), a.norm());
  for (m = 1; m <= n_ + 1; ++m) {
    Vec next = jordan_product(unit, a, powers.back());
    Mat K(n_, m);
    for (int j = 0; j < m; ++j) K.col(j) = powers[j];
    Eigen::ColPivHouseholderQR<Mat> qr(K);
    Vec c = qr.solve(next);
    Scalar res = (K * c - next).norm();
    if (res <= tol * std::pow(scale, Scalar(m))) {
      coeffs = c;
      break;
    }
    powers.push_back(next);
  }
  if (coeffs.size() == 0) throw JordanError("minimal polynomial not found");
  // Companion matrix of x^m - sum c_j x^j.
  Mat comp = Mat::Zero(m, m);
  for (int i = 1; i < m; ++i) comp(i, i - 1) = 1;
  for (int j = 0; j < m; ++j) comp(j, m - 1) = coeffs(j);
  Eigen::EigenSolver<Mat> es(comp);
  std::vector<Scalar> roots;
  for (int i = 0; i < m; ++i) {
    auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > Scalar(1e-6) * scale) throw JordanError("non-real spectral value");
    roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end(), std::greater<Scalar>());
  Spectral<Scalar> out;
  out.values = roots;
  for (int j = 0; j < m; ++j) {
    // Lagrange polynomial prod_{i != j} (x - r_i)/(r_j - r_i), expanded in the monomial basis.
    std::vector<Scalar> poly{Scalar(1)};
    for (int i = 0; i < m; ++i) {
      if (i == j) continue;
      Scalar den = roots[j] - roots[i];
      std::vector<Scalar> next(poly.size() + 1, Scalar(0));
      for (size_t q = 0; q < poly.size(); ++q) {
        next[q + 1] += poly[q] / den;
        next[q] -= poly[q] * roots[i] / den;
      }
      poly = next;
    }
    Vec c = Vec::Zero(n_);
    for (size_t q = 0; q < poly.size(); ++q) c += poly[q] * powers[q];
    out.idempotents.push_back(c);
  }
  return out;
}

template <typename Scalar>
PeirceDecomposition<Scalar> JordanPair<Scalar>::peirce(const Vec& e, const Vec& e_prime) const {
  PeirceDecomposition<Scalar> pd;
  Mat I = Mat::Identity(n_, n_);
  auto build = [&](const Mat& Dm, Mat& P2, Mat& P1, Mat& P0) {
    P2 = Scalar(0.5) * Dm * (Dm - I);
    P1 = Dm * (Scalar(2) * I - Dm);
    P0 = Scalar(0.5) * (Dm - I) * (Dm - Scalar(2) * I);
    Scalar c = std::max({(Dm * P2 - Scalar(2) * P2).norm(), (Dm * P1 - P1).norm(), (Dm * P0).norm()});
    pd.clustering = std::max(pd.clustering, c);
  };
  build(D(Side::plus, e, e_prime), pd.P2, pd.P1, pd.P0);
  build(D(Side::minus, e_prime, e), pd.P2m, pd.P1m, pd.P0m);
  if (pd.clustering > Scalar(1e-8) * std::max(Scalar(1), Scalar(n_)))
    throw JordanError("spectrum of D_{e,e'} is not clustered at {0,1,2}");
  pd.dim2 = static_cast<int>(std::lround(static_cast<double>(pd.P2.trace())));
  pd.dim1 = static_cast<int>(std::lround(static_cast<double>(pd.P1.trace())));
  pd.dim0 = static_cast<int>(std::lround(static_cast<double>(pd.P0.trace())));
  return pd;
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::joint_projector(int i, int j) const {
  const int r = static_cast<int>(frame_.size());
  Mat P = Mat::Identity(n_, n_);
  Mat I = Mat::Identity(n_, n_);
  for (int l = 1; l <= r; ++l) {
    int level = (l == i) + (l == j);
    Mat Dm = D(Side::plus, frame_[l - 1], theta(frame_[l - 1]));
    Mat Pl;
    if (level == 2)
      Pl = Scalar(0.5) * Dm * (Dm - I);
    else if (level == 1)
      Pl = Dm * (Scalar(2) * I - Dm);
    else
      Pl = Scalar(0.5) * (Dm - I) * (Dm - Scalar(2) * I);
    P = P * Pl;
  }
  return P;
}

template <typename Scalar>
typename JordanPair<Scalar>::Mat JordanPair<Scalar>::frame_involution() const {
  Vec e = frame_sum(static_cast<int>(frame_.size()));
  return Q(Side::plus, e) * theta_;
}

template <typename Scalar>
int JordanPair<Scalar>::peirce2_dim(int k) const {
  double v = k * (1.0 + static_cast<double>(constants_.e)) + k * (k - 1.0) * static_cast<double>(constants_.d);
  return static_cast<int>(std::lround(v));
}

template <typename Scalar>
void JordanPair<Scalar>::build_frame() {
  // A maximal tripotent and a generic element of its Euclidean part.
  Vec emax = Vec::Zero(n_), aref = Vec::Zero(n_);
  switch (spec_.family) {
    case Family::sym:
    case Family::herm_c:
      for (int i = 0; i < spec_.a; ++i) {
        emax(i) = 1;
        aref(i) = Scalar(spec_.a - i);
      }
      break;
    case Family::spin: {
      int pos = spec_.a / 2;
      Vec u = Vec::Zero(n_), v = Vec::Zero(n_);
      u(0) = 1;
      v(pos) = 1;
      Vec e1 = (u + v) / std::sqrt(Scalar(2)), e2 = (u - v) / std::sqrt(Scalar(2));
      emax = e1 + e2;
      aref = Scalar(2) * e1 + e2;
      break;
    }
    case Family::rect: {
      int m = std::min(rows_, cols_);
      for (int i = 0; i < m; ++i) {
        emax(i * cols_ + i) = 1;
        aref(i * cols_ + i) = Scalar(m - i);
      }
      break;
    }
  }
  Spectral<Scalar> sp = spectral(emax, aref);
  frame_ = sp.idempotents;
  for (auto& f : frame_) {
    // Sign convention: first coordinate of magnitude above 1e-12 is positive.
    for (int a = 0; a < n_; ++a)
      if (std::abs(f(a)) > Scalar(1e-12)) {
        if (f(a) < 0) f = -f;
        break;
      }
  }
}

template <typename Scalar>
void JordanPair<Scalar>::build_constants() {
  auto& c = constants_;
  c.r = static_cast<int>(frame_.size());
  auto rnd = [](Scalar v) { return Scalar(std::round(static_cast<double>(v) * 2.0) / 2.0 + 0.0); };
  Mat sigma = frame_involution();
  Mat I = Mat::Identity(n_, n_);
  Mat P11 = joint_projector(1, 1);
  c.e = rnd((Scalar(0.5) * (I - sigma) * P11).trace());
  if (c.r >= 2) {
    Mat P12 = joint_projector(1, 2);
    c.d_plus = rnd((Scalar(0.5) * (I + sigma) * P12).trace());
    c.d_minus = rnd((Scalar(0.5) * (I - sigma) * P12).trace());
  }
  c.d = (c.d_plus + c.d_minus) / 2;
  c.b = rnd(joint_projector(1, 0).trace());
  c.p = (c.e + 1) + (c.r - 1) * c.d + c.b / 2;
  c.p_trace = D(Side::plus, frame_[0], theta(frame_[0])).trace() / 2;
  Vec e = frame_sum(c.r);
  Mat Dm = D(Side::plus, e, theta(e));
  Mat P1 = Dm * (Scalar(2) * I - Dm);
  c.unital = P1.norm() < Scalar(1e-8);
  gram_ = Mat(n_, n_);
  Vec ea = Vec::Zero(n_), eb = Vec::Zero(n_);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b) {
      ea.setZero(), eb.setZero();
      ea(a) = 1, eb(b) = 1;
      gram_(a, b) = D(Side::plus, ea, eb).trace() / (2 * c.p);
    }
  gram_inv_ = gram_.inverse();
}

template <typename Scalar>
Idempotent<Scalar> JordanPair<Scalar>::complete_idempotent(const Vec& e) const {
  Mat Qe = Q(Side::plus, e);
  Eigen::JacobiSVD<Mat> svd(Qe, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(Scalar(1e-10));
  Vec y = svd.solve(e);
  Idempotent<Scalar> id;
  id.e = quad(Side::plus, e, y);  // equals e when e is regular
  id.e_prime = quad(Side::minus, y, id.e);
  Scalar tol = Scalar(1e-8) * std::max(Scalar(1), e.norm());
  if ((quad(Side::plus, id.e, id.e_prime) - id.e).norm() > tol ||
      (quad(Side::minus, id.e_prime, id.e) - id.e_prime).norm() > tol || (id.e - e).norm() > tol)
    throw JordanError("element does not complete to an idempotent within tolerance");
  id.rank = rank_of(id.e);
  return id;
}

template <typename Scalar>
int JordanPair<Scalar>::rank_of(const Vec& x) const {
  if (x.norm() == 0) return 0;
  Mat Qx = Q(Side::plus, x);
  Eigen::JacobiSVD<Mat> svd(Qx);
  const auto& s = svd.singularValues();
  Scalar smax = s(0);
  if (smax == 0) return 0;
  int m = 0;
  for (int i = 0; i < s.size(); ++i) {
    Scalar rel = s(i) / smax;
    if (rel >= Scalar(1e-6))
      ++m;
    else if (rel >= Scalar(1e-8))
      throw RankAmbiguous("singular value ratio " + std::to_string(static_cast<double>(rel)) +
                          " inside the ambiguous band [1e-8, 1e-6]");
  }
  for (int k = 0; k <= constants_.r; ++k)
    if (peirce2_dim(k) == m) return k;
  throw RankAmbiguous("image dimension " + std::to_string(m) + " matches no Peirce-2 dimension");
}

template <typename Scalar>
Scalar JordanPair<Scalar>::pair_det(const Vec& x, const Vec& y, int steps) const {
  const Scalar two_p = 2 * constants_.p;
  const long twop_int = std::lround(static_cast<double>(two_p));
  const bool odd = (twop_int % 2) != 0;
  std::vector<Scalar> hist{Scalar(1)};
  Scalar eps = Scalar(1e-10);
  for (int j = 1; j <= steps; ++j) {
    Scalar t = Scalar(j) / Scalar(steps);
    Scalar det = det_bergman(t * x, t * y);
    Scalar mag = std::pow(std::abs(det), Scalar(1) / two_p);
    Scalar pred;
    size_t h = hist.size();
    if (h >= 3)
      pred = 3 * hist[h - 1] - 3 * hist[h - 2] + hist[h - 3];
    else if (h == 2)
      pred = 2 * hist[1] - hist[0];
    else
      pred = hist[0];
    Scalar val;
    if (odd) {
      val = det >= 0 ? mag : -mag;
    } else {
      val = std::abs(pred - mag) <= std::abs(pred + mag) ? mag : -mag;
    }
    if (mag < eps || (hist.back() > 0) != (val > 0))
      throw BranchError("continuation of the pair determinant meets a zero of Det B");
    hist.push_back(val);
  }
  return hist.back();
}

template <typename Scalar>
BergmanDecomposition<Scalar> JordanPair<Scalar>::bergman_decompose(const Vec& x, const Vec& y,
                                                                 Scalar cond_cap) const {
  BergmanDecomposition<Scalar> out;
  out.B_xy = bergman(Side::plus, x, y);
  Mat Byx = bergman(Side::minus, y, x);
  auto cond = [](const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    return s(s.size() - 1) == 0 ? std::numeric_limits<Scalar>::infinity() : s(0) / s(s.size() - 1);
  };
  if (cond(out.B_xy) > cond_cap || cond(Byx) > cond_cap) throw JordanError("singular Bergman operator");
  out.B_yx_inv = Byx.inverse();
  out.x_y = out.B_xy.partialPivLu().solve(x - quad(Side::plus, x, y));
  out.y_x = Byx.partialPivLu().solve(y - quad(Side::minus, y, x));
  return out;
}

template <typename Scalar>
typename JordanPair<Scalar>::Vec JordanPair<Scalar>::peirce2_inverse(const Vec& x2,
                                                                     const PeirceDecomposition<Scalar>& pd) const {
  // Solve Q_{x2} u = x2 for u in V_2^-; Q_{x2} is invertible V_2^- -> V_2^+.
  Mat B2m = range_basis<Scalar>(pd.P2m);
  Mat B2p = range_basis<Scalar>(pd.P2);
  Mat A = B2p.transpose() * Q(Side::plus, x2) * B2m;
  Eigen::FullPivLU<Mat> lu(A);
  if (!lu.isInvertible()) throw JordanError("x2 is not invertible in V_2");
  Vec c = lu.solve(B2p.transpose() * x2);
  return B2m * c;
}

}  // namespace jb
