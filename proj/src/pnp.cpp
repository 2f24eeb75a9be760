#include "vims/pnp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace vims {

namespace {

// Real roots of c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0 via the companion
// matrix (degenerate leading coefficients fall back to the cubic/quadratic).
std::vector<double> real_poly_roots(std::array<double, 5> c) {
  int deg = 4;
  while (deg > 0 && std::abs(c[static_cast<std::size_t>(deg)]) < 1e-14) --deg;
  std::vector<double> roots;
  if (deg <= 0) return roots;
  MatX comp = MatX::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) {
    comp(0, i) = -c[static_cast<std::size_t>(deg - 1 - i)] / c[static_cast<std::size_t>(deg)];
  }
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  const Eigen::EigenSolver<MatX> es(comp);
  for (int i = 0; i < deg; ++i) {
    const auto ev = es.eigenvalues()[i];
    if (std::abs(ev.imag()) < 1e-8 * std::max(1.0, std::abs(ev.real()))) {
      roots.push_back(ev.real());
    }
  }
  return roots;
}

// Rigid alignment X_cam = R * X_ref + t from exact point pairs (Kabsch).
Pose3 absolute_orientation(const std::vector<Vec3>& ref, const std::vector<Vec3>& cam) {
  Vec3 c_ref = Vec3::Zero(), c_cam = Vec3::Zero();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    c_ref += ref[i];
    c_cam += cam[i];
  }
  c_ref /= static_cast<double>(ref.size());
  c_cam /= static_cast<double>(cam.size());
  Mat3 H = Mat3::Zero();
  for (std::size_t i = 0; i < ref.size(); ++i) {
    H += (ref[i] - c_ref) * (cam[i] - c_cam).transpose();
  }
  const Eigen::JacobiSVD<Mat3> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 D = Mat3::Identity();
  D(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant();
  const Mat3 R = svd.matrixV() * D * svd.matrixU().transpose();
  return Pose3(Quat(R), c_cam - R * c_ref);
}

Vec2 project(const Pose3& T_cr, const Vec3& p) {
  const Vec3 x = T_cr * p;
  return Vec2(x.x() / x.z(), x.y() / x.z());
}

bool in_front(const Pose3& T_cr, const Vec3& p) { return (T_cr * p).z() > 0.05; }

// Gauss-Newton refinement of the camera pose on the given correspondences.
Pose3 refine_pose(Pose3 T, const std::vector<Correspondence>& matches,
                  const std::vector<char>& mask) {
  for (int iter = 0; iter < 10; ++iter) {
    Mat6 H = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    double cost = 0.0;
    for (std::size_t i = 0; i < matches.size(); ++i) {
      if (!mask[i]) continue;
      const Vec3 x = T * matches[i].point;
      if (x.z() < 0.05) continue;
      const double iz = 1.0 / x.z();
      const Vec2 r(x.x() * iz - matches[i].uv.x(), x.y() * iz - matches[i].uv.y());
      Eigen::Matrix<double, 2, 3> P;
      P << iz, 0.0, -x.x() * iz * iz, 0.0, iz, -x.y() * iz * iz;
      Eigen::Matrix<double, 2, 6> J;
      J.block<2, 3>(0, 0) = P;
      J.block<2, 3>(0, 3) = -P * T.rotation() * skew(matches[i].point);
      H += J.transpose() * J;
      b += J.transpose() * r;
      cost += r.squaredNorm();
    }
    H.diagonal().array() += 1e-12;
    const Vec6 dx = H.ldlt().solve(-b);
    T.t += dx.head<3>();
    T.q = (T.q * so3_exp(dx.tail<3>())).normalized();
    if (dx.norm() < 1e-12) break;
  }
  return T;
}

}  // namespace

std::vector<Pose3> p3p_solve(const std::array<Vec3, 3>& points,
                             const std::array<Vec3, 3>& bearings) {
  std::vector<Pose3> solutions;
  const Vec3 j1 = bearings[0].normalized();
  const Vec3 j2 = bearings[1].normalized();
  const Vec3 j3 = bearings[2].normalized();

// side lengths: a opposite point 1, etc.
  const double a = (points[1] - points[2]).norm();
  const double b = (points[0] - points[2]).norm();
  const double c = (points[0] - points[1]).norm();
  if (a < 1e-9 || b < 1e-9 || c < 1e-9) return solutions;

  const double cos_alpha = j2.dot(j3);
  const double cos_beta = j1.dot(j3);
  const double cos_gamma = j1.dot(j2);

  // Distances s1, s2 = u s1, s3 = v s1 from the law of cosines triplet;
  // eliminating u and s1 leaves a quartic in v.
  const double A = (a * a) / (b * b);
  const double C = (c * c) / (b * b);
  const double p = 2.0 * cos_alpha;
  const double q = 2.0 * cos_beta;
  const double r = 2.0 * cos_gamma;

  // u(v) = num(v) / den(v)
  const double n0 = 1.0 + (A - C);
  const double n1 = -(A - C) * q;
  const double n2 = (A - C) - 1.0;
  const double d0 = r;
  const double d1 = -p;

  // F(v) = num^2 - r num den + den^2 (1 - C(1 + v^2 - q v)) = 0
  const double g0 = 1.0 - C;
  const double g1 = C * q;
  const double g2 = -C;

  std::array<double, 5> num2{n0 * n0, 2.0 * n0 * n1, n1 * n1 + 2.0 * n0 * n2,
                             2.0 * n1 * n2, n2 * n2};
  std::array<double, 5> numden{n0 * d0, n0 * d1 + n1 * d0, n1 * d1 + n2 * d0, n2 * d1, 0.0};
  const std::array<double, 3> den2{d0 * d0, 2.0 * d0 * d1, d1 * d1};
  std::array<double, 5> den2g{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) den2g[static_cast<std::size_t>(i + j)] +=
        den2[static_cast<std::size_t>(i)] * (j == 0 ? g0 : j == 1 ? g1 : g2);
  }
  std::array<double, 5> F{};
  for (int i = 0; i < 5; ++i) {
    F[static_cast<std::size_t>(i)] = num2[static_cast<std::size_t>(i)] -
                                     r * numden[static_cast<std::size_t>(i)] +
                                     den2g[static_cast<std::size_t>(i)];
  }

  for (double v : real_poly_roots(F)) {
    if (v <= 0.0) continue;
    const double den = d0 + d1 * v;
    if (std::abs(den) < 1e-12) continue;
    const double u = (n0 + n1 * v + n2 * v * v) / den;
    if (u <= 0.0) continue;
    const double s1_sq = (b * b) / (1.0 + v * v - q * v);
    if (s1_sq <= 0.0) continue;
    const double s1 = std::sqrt(s1_sq);
    const double s2 = u * s1;
    const double s3 = v * s1;
    const std::vector<Vec3> cam{s1 * j1, s2 * j2, s3 * j3};
    const std::vector<Vec3> ref{points[0], points[1], points[2]};
    solutions.push_back(absolute_orientation(ref, cam));
  }
  return solutions;
}

std::optional<PnpResult> pnp_ransac(const std::vector<Correspondence>& matches,
                                    const PnpOptions& opts) {
  const std::size_t n = matches.size();
  if (n < 4) return std::nullopt;

  Rng rng(opts.seed);
  int best_count = 0;
  double best_err = 1e300;
  Pose3 best_pose;
  bool have = false;

  int max_iters = opts.iterations;
  for (int iter = 0; iter < max_iters; ++iter) {
    // four distinct indices
    std::array<std::size_t, 4> idx{};
    for (int k = 0; k < 4;) {
      const std::size_t cand = rng.uniform_index(n);
      bool dup = false;
      for (int j = 0; j < k; ++j) dup = dup || idx[static_cast<std::size_t>(j)] == cand;
      if (!dup) idx[static_cast<std::size_t>(k++)] = cand;
    }
    const std::array<Vec3, 3> pts{matches[idx[0]].point, matches[idx[1]].point,
                                  matches[idx[2]].point};
    const std::array<Vec3, 3> brg{
        Vec3(matches[idx[0]].uv.x(), matches[idx[0]].uv.y(), 1.0),
        Vec3(matches[idx[1]].uv.x(), matches[idx[1]].uv.y(), 1.0),
        Vec3(matches[idx[2]].uv.x(), matches[idx[2]].uv.y(), 1.0)};

    // collinearity guard
    const Vec3 e1 = pts[1] - pts[0], e2 = pts[2] - pts[0];
    if (e1.cross(e2).norm() < 1e-8) continue;

    for (const Pose3& hyp : p3p_solve(pts, brg)) {
      // disambiguate with the fourth point first
      if (!in_front(hyp, matches[idx[3]].point)) continue;
      const Vec2 r4 = project(hyp, matches[idx[3]].point) - matches[idx[3]].uv;
      if (r4.norm() > 4.0 * opts.inlier_threshold) continue;

      int count = 0;
      double err_sum = 0.0;
      for (const Correspondence& m : matches) {
        if (!in_front(hyp, m.point)) continue;
        const double e = (project(hyp, m.point) - m.uv).norm();
        if (e < opts.inlier_threshold) {
          ++count;
          err_sum += e;
        }
      }
      if (count > best_count || (count == best_count && err_sum < best_err)) {
        best_count = count;
        best_err = err_sum;
        best_pose = hyp;
        have = true;
        // adaptive termination (99.9% confidence on a 4-point sample)
        const double w = static_cast<double>(count) / static_cast<double>(n);
        if (w > 0.2) {
          const double denom = std::log(std::max(1e-12, 1.0 - w * w * w * w));
          const int needed = static_cast<int>(std::ceil(std::log(1e-3) / denom));
          max_iters = std::min(max_iters, std::max(iter + 1, needed));
        }
      }
    }
  }

  if (!have || best_count < opts.min_inliers) return std::nullopt;

  // refine on inliers, then recount once
  PnpResult res;
  res.inlier_mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Correspondence& m = matches[i];
    if (in_front(best_pose, m.point) &&
        (project(best_pose, m.point) - m.uv).norm() < opts.inlier_threshold) {
      res.inlier_mask[i] = 1;
    }
  }
  Pose3 refined = refine_pose(best_pose, matches, res.inlier_mask);

  res.inlier_count = 0;
  double err_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Correspondence& m = matches[i];
    const bool in = in_front(refined, m.point) &&
                    (project(refined, m.point) - m.uv).norm() < opts.inlier_threshold;
    res.inlier_mask[i] = in ? 1 : 0;
    if (in) {
      ++res.inlier_count;
      err_sum += (project(refined, m.point) - m.uv).norm();
    }
  }
  if (res.inlier_count < opts.min_inliers) return std::nullopt;
  refined = refine_pose(refined, matches, res.inlier_mask);
  res.pose = refined;
  res.mean_error = err_sum / std::max(1, res.inlier_count);
  return res;
}

}  // namespace vims
