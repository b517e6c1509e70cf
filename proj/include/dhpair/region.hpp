#pragma once

#include <array>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dhpair/linalg.hpp"

namespace dhpair {

class RegionError : public Error {
 public:
  using Error::Error;
};

enum class PrimitiveKind {
  left_conic_sector,
  right_conic_sector,
  disk,
  vertical_strip,
  left_half_plane,
  right_half_plane,
  ellipsoid,
  left_parabola,
  right_parabola,
  left_hyperbola,
  right_hyperbola,
  horizontal_strip,
};

inline constexpr std::array<PrimitiveKind, 12> kAllPrimitiveKinds = {
    PrimitiveKind::left_conic_sector, PrimitiveKind::right_conic_sector,
    PrimitiveKind::disk,              PrimitiveKind::vertical_strip,
    PrimitiveKind::left_half_plane,   PrimitiveKind::right_half_plane,
    PrimitiveKind::ellipsoid,         PrimitiveKind::left_parabola,
    PrimitiveKind::right_parabola,    PrimitiveKind::left_hyperbola,
    PrimitiveKind::right_hyperbola,   PrimitiveKind::horizontal_strip,
};

inline std::string_view kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::left_conic_sector: return "left_conic_sector";
    case PrimitiveKind::right_conic_sector: return "right_conic_sector";
    case PrimitiveKind::disk: return "disk";
    case PrimitiveKind::vertical_strip: return "vertical_strip";
    case PrimitiveKind::left_half_plane: return "left_half_plane";
    case PrimitiveKind::right_half_plane: return "right_half_plane";
    case PrimitiveKind::ellipsoid: return "ellipsoid";
    case PrimitiveKind::left_parabola: return "left_parabola";
    case PrimitiveKind::right_parabola: return "right_parabola";
    case PrimitiveKind::left_hyperbola: return "left_hyperbola";
    case PrimitiveKind::right_hyperbola: return "right_hyperbola";
    case PrimitiveKind::horizontal_strip: return "horizontal_strip";
  }
  return "unknown";
}

// Parameter names in storage order; these are also the JSON field names.
inline std::vector<std::string> kind_param_names(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::left_conic_sector:
    case PrimitiveKind::right_conic_sector: return {"a", "theta"};
    case PrimitiveKind::disk: return {"q", "r"};
    case PrimitiveKind::vertical_strip: return {"h", "k"};
    case PrimitiveKind::left_half_plane: return {"k"};
    case PrimitiveKind::right_half_plane: return {"h"};
    case PrimitiveKind::ellipsoid: return {"q_e", "a_e", "b_e"};
    case PrimitiveKind::left_parabola:
    case PrimitiveKind::right_parabola: return {"q_p", "c_p"};
    case PrimitiveKind::left_hyperbola:
    case PrimitiveKind::right_hyperbola: return {"a_h", "b_h"};
    case PrimitiveKind::horizontal_strip: return {"w"};
  }
  return {};
}

inline std::optional<PrimitiveKind> kind_from_name(std::string_view name) {
  for (PrimitiveKind k : kAllPrimitiveKinds)
    if (kind_name(k) == name) return k;
  return std::nullopt;
}

// Coefficients of a stability block written as P (x) T + K (x) J + S (x) R,
// with P, S symmetric and K skew. The block being positive definite is the
// stability condition for pairs (TQ, (J - R)Q).
struct TableCoefficients {
  Mat P;
  Mat K;
  Mat S;
};

// One of the twelve standard LMI region shapes. Parameters are validated on
// construction; geometry:
//   left_conic_sector(a, theta)  : Re z < a, |Im z| < (a - Re z) tan(theta)
//   right_conic_sector(a, theta) : Re z > a, |Im z| < (Re z - a) tan(theta)
//   disk(q, r)                   : |z - q| < r
//   vertical_strip(h, k)         : h < Re z < k
//   left_half_plane(k)           : Re z < k
//   right_half_plane(h)          : Re z > h
//   ellipsoid(q_e, a_e, b_e)     : (Re z - q_e)^2 / a_e^2 + (Im z)^2 / b_e^2 < 1
//   left_parabola(q_p, c_p)      : Re z < q_p - (c_p / 2) (Im z)^2
//   right_parabola(q_p, c_p)     : Re z > q_p + (c_p / 2) (Im z)^2
//   left_hyperbola(a_h, b_h)     : Re z < 0, (Re z)^2/a_h^2 - (Im z)^2/b_h^2 > 1
//   right_hyperbola(a_h, b_h)    : Re z > 0, (Re z)^2/a_h^2 - (Im z)^2/b_h^2 > 1
//   horizontal_strip(w)          : |Im z| < w
class RegionPrimitive {
 public:
  static RegionPrimitive left_conic_sector(double a, double theta) {
    check_angle(theta);
    return {PrimitiveKind::left_conic_sector, {a, theta, 0.0}};
  }
  static RegionPrimitive right_conic_sector(double a, double theta) {
    check_angle(theta);
    return {PrimitiveKind::right_conic_sector, {a, theta, 0.0}};
  }
  static RegionPrimitive disk(double q, double r) {
    check_positive(r, "r");
    return {PrimitiveKind::disk, {q, r, 0.0}};
  }
  static RegionPrimitive vertical_strip(double h, double k) {
    check_finite(h, "h");
    check_finite(k, "k");
    if (!(h < k)) throw RegionError("vertical_strip: parameter h must be < k");
    return {PrimitiveKind::vertical_strip, {h, k, 0.0}};
  }
  static RegionPrimitive left_half_plane(double k) {
    check_finite(k, "k");
    return {PrimitiveKind::left_half_plane, {k, 0.0, 0.0}};
  }
  static RegionPrimitive right_half_plane(double h) {
    check_finite(h, "h");
    return {PrimitiveKind::right_half_plane, {h, 0.0, 0.0}};
  }
  static RegionPrimitive ellipsoid(double q_e, double a_e, double b_e) {
    check_finite(q_e, "q_e");
    check_positive(a_e, "a_e");
    check_positive(b_e, "b_e");
    return {PrimitiveKind::ellipsoid, {q_e, a_e, b_e}};
  }
  static RegionPrimitive left_parabola(double q_p, double c_p) {
    check_finite(q_p, "q_p");
    check_positive(c_p, "c_p");
    return {PrimitiveKind::left_parabola, {q_p, c_p, 0.0}};
  }
  static RegionPrimitive right_parabola(double q_p, double c_p) {
    check_finite(q_p, "q_p");
    check_positive(c_p, "c_p");
    return {PrimitiveKind::right_parabola, {q_p, c_p, 0.0}};
  }
  static RegionPrimitive left_hyperbola(double a_h, double b_h) {
    check_positive(a_h, "a_h");
    check_positive(b_h, "b_h");
    return {PrimitiveKind::left_hyperbola, {a_h, b_h, 0.0}};
  }
  static RegionPrimitive right_hyperbola(double a_h, double b_h) {
    check_positive(a_h, "a_h");
    check_positive(b_h, "b_h");
    return {PrimitiveKind::right_hyperbola, {a_h, b_h, 0.0}};
  }
  static RegionPrimitive horizontal_strip(double w) {
    check_positive(w, "w");
    return {PrimitiveKind::horizontal_strip, {w, 0.0, 0.0}};
  }

  // Builds from a kind and its parameters in kind_param_names order.
  static RegionPrimitive make(PrimitiveKind k, const std::vector<double>& p) {
    const auto names = kind_param_names(k);
    if (p.size() != names.size())
      throw RegionError(std::string(kind_name(k)) + ": expected " +
                        std::to_string(names.size()) + " parameters");
    switch (k) {
      case PrimitiveKind::left_conic_sector: return left_conic_sector(p[0], p[1]);
      case PrimitiveKind::right_conic_sector: return right_conic_sector(p[0], p[1]);
      case PrimitiveKind::disk: return disk(p[0], p[1]);
      case PrimitiveKind::vertical_strip: return vertical_strip(p[0], p[1]);
      case PrimitiveKind::left_half_plane: return left_half_plane(p[0]);
      case PrimitiveKind::right_half_plane: return right_half_plane(p[0]);
      case PrimitiveKind::ellipsoid: return ellipsoid(p[0], p[1], p[2]);
      case PrimitiveKind::left_parabola: return left_parabola(p[0], p[1]);
      case PrimitiveKind::right_parabola: return right_parabola(p[0], p[1]);
      case PrimitiveKind::left_hyperbola: return left_hyperbola(p[0], p[1]);
      case PrimitiveKind::right_hyperbola: return right_hyperbola(p[0], p[1]);
      case PrimitiveKind::horizontal_strip: return horizontal_strip(p[0]);
    }
    throw RegionError("unknown primitive kind");
  }

  PrimitiveKind kind() const { return kind_; }
  std::string_view name() const { return kind_name(kind_); }
  double param(std::size_t i) const { return params_.at(i); }
  std::vector<double> params() const {
    return {params_.begin(), params_.begin() + kind_param_names(kind_).size()};
  }

  TableCoefficients table_coefficients() const {
    const Mat rot = (Mat(2, 2) << 0, -1, 1, 0).finished();
    const Mat swap = (Mat(2, 2) << 0, 1, 1, 0).finished();
    const Mat i2 = Mat::Identity(2, 2);
    const Mat zero2 = Mat::Zero(2, 2);
    const double p0 = params_[0], p1 = params_[1], p2 = params_[2];
    auto one = [](double v) { return Mat::Constant(1, 1, v); };
    switch (kind_) {
      case PrimitiveKind::left_conic_sector:
        return {std::sin(p1) * p0 * i2, std::cos(p1) * rot, std::sin(p1) * i2};
      case PrimitiveKind::right_conic_sector:
        return {-std::sin(p1) * p0 * i2, std::cos(p1) * rot, -std::sin(p1) * i2};
      case PrimitiveKind::disk:
        return {(Mat(2, 2) << p1, p0, p0, p1).finished(), rot, swap};
      case PrimitiveKind::vertical_strip:
        return {Vec2(p1, -p0), zero2, Vec2(1.0, -1.0)};
      case PrimitiveKind::left_half_plane: return {one(p0), one(0.0), one(1.0)};
      case PrimitiveKind::right_half_plane: return {one(-p0), one(0.0), one(-1.0)};
      case PrimitiveKind::ellipsoid:
        return {(Mat(2, 2) << p1, p0, p0, p1).finished(), (p1 / p2) * rot, swap};
      case PrimitiveKind::left_parabola:
        return {Vec2(1.0, p0), std::sqrt(p1 / 2.0) * rot, Vec2(0.0, 1.0)};
      case PrimitiveKind::right_parabola:
        return {Vec2(1.0, -p0), std::sqrt(p1 / 2.0) * rot, Vec2(0.0, -1.0)};
      case PrimitiveKind::left_hyperbola: return {-swap, rot / p1, i2 / p0};
      case PrimitiveKind::right_hyperbola: return {-swap, rot / p1, -i2 / p0};
      case PrimitiveKind::horizontal_strip: return {p0 * i2, rot, zero2};
    }
    throw RegionError("unknown primitive kind");
  }

  // Characteristic-function normalization. For every primitive except the
  // disk, B = -2P and C = S - K, so that the Kronecker assembly
  // B(x)T + (C - C^T)(x)J - (C + C^T)(x)R equals -2 * block. The disk keeps
  // the classical B = [-r q; q -r], C = [0 0; -1 0]; its assembly equals
  // -W^T block W with W = [0 -1; 1 0] (x) I.
  double assembly_scale() const { return kind_ == PrimitiveKind::disk ? 1.0 : 2.0; }
  Mat assembly_congruence() const {
    if (kind_ == PrimitiveKind::disk) return (Mat(2, 2) << 0, -1, 1, 0).finished();
    const Eigen::Index s = (kind_ == PrimitiveKind::left_half_plane ||
                            kind_ == PrimitiveKind::right_half_plane)
                               ? 1
                               : 2;
    return Mat::Identity(s, s);
  }

  std::pair<Mat, Mat> characteristic_bc() const {
    if (kind_ == PrimitiveKind::disk) {
      const double q = params_[0], r = params_[1];
      return {(Mat(2, 2) << -r, q, q, -r).finished(), (Mat(2, 2) << 0, 0, -1, 0).finished()};
    }
    const TableCoefficients tc = table_coefficients();
    return {-2.0 * tc.P, tc.S - tc.K};
  }

  std::string describe() const {
    std::string out(name());
    out += "(";
    const auto names = kind_param_names(kind_);
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out += ", ";
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.12g", params_[i]);
      out += names[i] + "=" + buf;
    }
    return out + ")";
  }

 private:
  RegionPrimitive(PrimitiveKind k, std::array<double, 3> p) : kind_(k), params_(p) {}

  static Mat Vec2(double a, double b) { return Eigen::Vector2d(a, b).asDiagonal(); }

  static void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw RegionError(std::string("parameter ") + name + " must be finite");
  }
  static void check_positive(double v, const char* name) {
    check_finite(v, name);
    if (!(v > 0.0)) throw RegionError(std::string("parameter ") + name + " must be > 0");
  }
  static void check_angle(double theta) {
    check_finite(theta, "theta");
    if (!(theta > 0.0 && theta < std::numbers::pi / 2))
      throw RegionError("parameter theta must lie in (0, pi/2)");
  }

  PrimitiveKind kind_;
  std::array<double, 3> params_;
};

// B (x) T + (C - C^T) (x) J - (C + C^T) (x) R.
inline Mat lmi_assemble(const Mat& B, const Mat& C, const Mat& T, const Mat& J, const Mat& R) {
  const Eigen::Index n = T.rows();
  require_square(T, n, "T");
  require_square(J, n, "J");
  require_square(R, n, "R");
  return kron(B, T) + kron(C - C.transpose(), J) - kron(C + C.transpose(), R);
}

enum class Membership { inside, boundary, outside };

struct MembershipResult {
  Membership status;
  double margin;  // -lambda_max(f(z))
};

// Closure of the real-axis slice {x real : f(x) < 0}. Because LMI regions are
// convex and symmetric about the real axis, the slice is empty iff the region
// is, and sup Re over the region equals hi.
struct RealSlice {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;
  double deepest_x = 0.0;      // minimiser of lambda_max(f(x)) on the search box
  double deepest_value = 0.0;  // lambda_max(f(deepest_x))
};

class LmiRegion {
 public:
  static constexpr double kDefaultMarginTol = 1e-9;

  static LmiRegion raw(const Mat& B, const Mat& C) {
    if (B.rows() == 0 || B.rows() != B.cols()) throw RegionError("B must be square and non-empty");
    require_square(C, B.rows(), "C");
    if (!B.allFinite() || !C.allFinite()) throw RegionError("B and C must be finite");
    LmiRegion out;
    out.B_ = sym(B);
    out.C_ = C;
    return out;
  }

  static LmiRegion from_primitive(const RegionPrimitive& p) {
    auto [B, C] = p.characteristic_bc();
    LmiRegion out = raw(B, C);
    out.primitives_.push_back(p);
    return out;
  }

  const Mat& B() const { return B_; }
  const Mat& C() const { return C_; }
  Eigen::Index size() const { return B_.rows(); }
  const std::vector<RegionPrimitive>& primitives() const { return primitives_; }

  CMat characteristic_matrix(Complex z) const {
    CMat f = B_.cast<Complex>() + z * C_.cast<Complex>() + std::conj(z) * C_.transpose().cast<Complex>();
    return f;
  }

  // lambda_max(f(z)); f is Hermitian by construction.
  double lambda_max_at(Complex z) const { return lambda_max(characteristic_matrix(z)); }

  MembershipResult membership(Complex z, double margin_tol = kDefaultMarginTol) const {
    const double lmax = lambda_max_at(z);
    Membership m = Membership::boundary;
    if (lmax < -margin_tol)
      m = Membership::inside;
    else if (lmax > margin_tol)
      m = Membership::outside;
    return {m, -lmax};
  }

  bool uniform_part_nonempty(double tol = 1e-12) const {
    const Vec ev = sym_eigenvalues(C_ + C_.transpose());
    const double scale = tol * (1.0 + ev.cwiseAbs().maxCoeff());
    return ev.minCoeff() > scale || ev.maxCoeff() < -scale;
  }

  RealSlice real_slice() const {
    const Mat S = C_ + C_.transpose();
    auto g = [&](double x) { return lambda_max(Mat(B_ + x * S)); };
    constexpr double kBox = 1e8;
    constexpr double kInvPhi = 0.6180339887498949;
    double a = -kBox, b = kBox;
    double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
      if (gc < gd) {
        b = d; d = c; gd = gc;
        c = b - kInvPhi * (b - a); gc = g(c);
      } else {
        a = c; c = d; gc = gd;
        d = a + kInvPhi * (b - a); gd = g(d);
      }
    }
    RealSlice out;
    out.deepest_x = 0.5 * (a + b);
    out.deepest_value = g(out.deepest_x);
    for (double edge : {-kBox, kBox}) {
      const double ge = g(edge);
      if (ge < out.deepest_value) {
        out.deepest_x = edge;
        out.deepest_value = ge;
      }
    }
    if (!(out.deepest_value < 0.0)) return out;
    out.empty = false;
    auto bisect = [&](double inside, double outside) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        if (mid == inside || mid == outside) break;
        (g(mid) < 0.0 ? inside : outside) = mid;
      }
      return 0.5 * (inside + outside);
    };
    const double inf = std::numeric_limits<double>::infinity();
    out.lo = g(-kBox) < 0.0 ? -inf : bisect(out.deepest_x, -kBox);
    out.hi = g(kBox) < 0.0 ? inf : bisect(out.deepest_x, kBox);
    return out;
  }

  bool empty() const { return real_slice().empty; }

  // True when the region is contained in the closed left half-plane.
  bool in_closed_left_half_plane(double tol = 1e-10) const {
    const RealSlice s = real_slice();
    return !s.empty && s.hi <= tol;
  }

  // True when the region is exactly the open left half-plane {Re z < 0}.
  bool is_hurwitz() const {
    return size() == 1 && std::abs(B_(0, 0)) <= 1e-14 * (1.0 + std::abs(C_(0, 0))) && C_(0, 0) > 0.0;
  }

  std::string describe() const {
    if (primitives_.empty()) return "raw LMI region of size " + std::to_string(size());
    std::string out;
    for (std::size_t i = 0; i < primitives_.size(); ++i) {
      if (i) out += " & ";
      out += primitives_[i].describe();
    }
    return out;
  }

 private:
  friend LmiRegion intersect(const LmiRegion& r1, const LmiRegion& r2);
  Mat B_;
  Mat C_;
  std::vector<RegionPrimitive> primitives_;
};

inline LmiRegion intersect(const LmiRegion& r1, const LmiRegion& r2) {
  LmiRegion out = LmiRegion::raw(block_diag(r1.B(), r2.B()), block_diag(r1.C(), r2.C()));
  out.primitives_ = r1.primitives();
  out.primitives_.insert(out.primitives_.end(), r2.primitives().begin(), r2.primitives().end());
  return out;
}

inline LmiRegion intersect_all(const std::vector<RegionPrimitive>& prims) {
  if (prims.empty()) throw RegionError("intersection of zero primitives");
  LmiRegion out = LmiRegion::from_primitive(prims.front());
  for (std::size_t i = 1; i < prims.size(); ++i)
    out = intersect(out, LmiRegion::from_primitive(prims[i]));
  return out;
}

inline LmiRegion hurwitz_region() {
  return LmiRegion::from_primitive(RegionPrimitive::left_half_plane(0.0));
}

inline LmiRegion schur_region() { return LmiRegion::from_primitive(RegionPrimitive::disk(0.0, 1.0)); }

// Stability block of one primitive, evaluated through the region's
// characteristic matrices: -(W^T (x) I) Mhat (W (x) I) / scale. The LMI
// "block > 0" is the stability condition for (TQ, (J - R)Q).
inline Mat stability_lmi_blocks(const RegionPrimitive& p, const Mat& T, const Mat& J, const Mat& R) {
  const Eigen::Index n = T.rows();
  require_square(J, n, "J");
  require_square(R, n, "R");
  auto [B, C] = p.characteristic_bc();
  const Mat w = kron(p.assembly_congruence(), Mat::Identity(n, n));
  const Mat mhat = lmi_assemble(B, C, T, J, R);
  return sym(-(w.transpose() * mhat * w) / p.assembly_scale());
}

}  // namespace dhpair
