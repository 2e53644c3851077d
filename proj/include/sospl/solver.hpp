#pragma once

#include <chrono>
#include <optional>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "sospl/certificate.hpp"

namespace sospl {

struct SolverConfig {
  double tol_feas = 1e-7;
  double tol_cert = 1e-6;
  double tol_gap = 1e-5;
  long max_iter = 100000;
  int check_every = 32;
  double over_relax = 1.5;  // splitting relaxation in (0, 2)
  std::uint64_t seed = 0;   // recorded for reproducibility; iterations are deterministic
};

struct PseudoMoments {
  std::vector<double> values;     // aligned with SosProgram::vars
  double affine_residual = 0.0;   // scaled row residual
  double min_block_eig = 0.0;     // trace-scaled minimum block eigenvalue

  double value(const SosProgram& prog, const Monomial& mono,
               std::int32_t group = 0) const {
    return values[prog.var_index(group, reduce(mono, prog.variables))];
  }
};

struct SolverOutcome {
  enum class Tag : std::uint8_t { Feasible, Infeasible, Indeterminate } tag =
      Tag::Indeterminate;
  PseudoMoments moments;               // Feasible
  RefutationCertificate certificate;   // Infeasible, always verified
  VerifyReport certificate_report;     // Infeasible
  double affine_residual = 0.0;        // diagnostics
  double cone_residual = 0.0;
  long iterations = 0;
  double wall_seconds = 0.0;

  bool feasible() const { return tag == Tag::Feasible; }
  bool infeasible() const { return tag == Tag::Infeasible; }
  bool indeterminate() const { return tag == Tag::Indeterminate; }
};

struct ResidualReport {
  double max_eq_violation = 0.0;
  double max_ineq_violation = 0.0;
  double min_block_eig = 0.0;  // trace-scaled
};

namespace detail {

using SpMat = Eigen::SparseMatrix<double>;

// Scaled copy of the program plus the cached normal-equation factorization.
// Douglas-Rachford splitting on w = (u, X, s, t) between the graph of the
// affine map u -> (S(u), Gu - h, Eu - f) and the cone {X psd, s >= 0, t = 0}.
// Near-converged iterates are polished: a least-squares Newton step onto the
// active boundary on the primal side, a multiplier least-squares fit on the
// dual side. Infeasible is only reported once the assembled certificate
// passes full polynomial verification.
class SplitSolver {
public:
  explicit SplitSolver(const SosProgram& prog) : prog_(prog) {
    n_ = prog.var_count();
    for (const PsdBlock& b : prog.blocks) {
      ScaledBlock sb;
      sb.src = &b;
      double kappa = 0.0;
      for (const PsdCell& c : b.cells) kappa = std::max(kappa, form_norm(c.form));
      sb.kappa = kappa > 0 ? kappa : 1.0;
      sb.dim = b.dim();
      blocks_.push_back(std::move(sb));
    }
    for (const AffineRow& r : prog.rows) {
      ScaledRow sr;
      sr.src = &r;
      double eta = form_norm(r.form);
      sr.eta = eta > 0 ? eta : 1.0;
      sr.form = r.form;
      for (LinTerm& t : sr.form) t.coeff /= sr.eta;
      sr.rhs = r.rhs / sr.eta;
      if (r.kind == RowKind::Equality)
        eq_rows_.push_back(std::move(sr));
      else
        in_rows_.push_back(std::move(sr));
    }
    factorize();
    reset();
  }

  void reset() {
    u_w_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    s_w_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(in_rows_.size()));
    t_w_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eq_rows_.size()));
    X_w_.assign(blocks_.size(), Eigen::MatrixXd());
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      X_w_[b] = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(blocks_[b].dim),
                                      static_cast<Eigen::Index>(blocks_[b].dim));
  }

  // Rebinds the level of a moment-bound probe row; the factorization and the
  // current iterate stay valid, so bisection probes restart warm.
  void set_probe_level(std::int32_t bound_index, double rhs_unscaled) {
    for (ScaledRow& r : in_rows_) {
      if (r.src->origin == RowOrigin::MomentBound && r.src->constraint == bound_index) {
        r.rhs = rhs_unscaled / r.eta;
        return;
      }
    }
    throw domain_error("probe row not found");
  }

  SolverOutcome run(const SolverConfig& cfg) {
    auto start = std::chrono::steady_clock::now();
    SolverOutcome out;
    const double rho = cfg.over_relax;
    double best_screen = std::numeric_limits<double>::infinity();
    double best_primal = std::numeric_limits<double>::infinity();

    std::vector<Eigen::MatrixXd> Sx(blocks_.size());
    Eigen::VectorXd ux, sx, tx;
    long iter = 0;
    for (; iter < cfg.max_iter; ++iter) {
      project_affine(ux, Sx, sx, tx);

      if (iter % cfg.check_every == 0 || iter == cfg.max_iter - 1) {
        decompose(Sx);
        double cone = cone_violation(sx, tx);
        if (cone <= cfg.tol_feas) {
          finish_feasible(out, ux, tx);
          break;
        }
        if (cone <= 1e-3 && cone < 0.9 * best_primal) {
          best_primal = cone;
          if (try_primal_polish(ux, cfg, out)) break;
        }
        if (try_certificate(sx, tx, cfg, best_screen, out)) break;
      }
      advance(Sx, sx, tx, rho);
    }
    out.iterations = iter;
    if (out.tag == SolverOutcome::Tag::Indeterminate) {
      project_affine(ux, Sx, sx, tx);
      decompose(Sx);
      out.cone_residual = cone_violation(sx, tx);
      out.affine_residual = tx.size() ? tx.cwiseAbs().maxCoeff() : 0.0;
      double screen = std::numeric_limits<double>::infinity();
      try_certificate(sx, tx, cfg, screen, out);
      out.iterations = iter;
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
  }

  // Trace-scaled violations of the program's rows and blocks at a point.
  ResidualReport residuals_at(const Eigen::VectorXd& u) const {
    ResidualReport rep;
    for (const ScaledBlock& sb : blocks_) {
      Eigen::MatrixXd m = materialize(sb, u, 1.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      double scale = std::max(1.0, std::abs(m.trace()));
      rep.min_block_eig = std::min(rep.min_block_eig, es.eigenvalues().minCoeff() / scale);
    }
    for (const ScaledRow& r : eq_rows_)
      rep.max_eq_violation =
          std::max(rep.max_eq_violation, std::abs(dot(r.form, u) - r.rhs));
    for (const ScaledRow& r : in_rows_)
      rep.max_ineq_violation =
          std::max(rep.max_ineq_violation, std::max(r.rhs - dot(r.form, u), 0.0));
    return rep;
  }

private:
  struct ScaledBlock {
    const PsdBlock* src = nullptr;
    double kappa = 1.0;
    std::size_t dim = 0;
  };
  struct ScaledRow {
    const AffineRow* src = nullptr;
    double eta = 1.0;
    LinForm form;
    double rhs = 0.0;
  };

  static double form_norm(const LinForm& f) {
    double s = 0.0;
    for (const LinTerm& t : f) s += t.coeff * t.coeff;
    return std::sqrt(s);
  }
  static double dot(const LinForm& f, const Eigen::VectorXd& u) {
    double s = 0.0;
    for (const LinTerm& t : f) s += t.coeff * u[static_cast<Eigen::Index>(t.var)];
    return s;
  }

  Eigen::MatrixXd materialize(const ScaledBlock& sb, const Eigen::VectorXd& u,
                              double scale) const {
    Eigen::MatrixXd m(sb.dim, sb.dim);
    for (const PsdCell& c : sb.src->cells) {
      double v = dot(c.form, u) / scale;
      m(c.row, c.col) = v;
      m(c.col, c.row) = v;
    }
    return m;
  }

  void factorize() {
    std::vector<Eigen::Triplet<double>> trip;
    auto rank1 = [&](const LinForm& f, double weight) {
      for (const LinTerm& a : f)
        for (const LinTerm& b : f)
          trip.emplace_back(static_cast<int>(a.var), static_cast<int>(b.var),
                            weight * a.coeff * b.coeff);
    };
    for (std::size_t i = 0; i < n_; ++i)
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    for (const ScaledBlock& sb : blocks_) {
      double k2 = sb.kappa * sb.kappa;
      for (const PsdCell& c : sb.src->cells)
        rank1(c.form, (c.row == c.col ? 1.0 : 2.0) / k2);
    }
    for (const ScaledRow& r : in_rows_) rank1(r.form, 1.0);
    for (const ScaledRow& r : eq_rows_) rank1(r.form, 1.0);
    SpMat H(static_cast<int>(n_), static_cast<int>(n_));
    H.setFromTriplets(trip.begin(), trip.end());
    fact_.compute(H);
    if (fact_.info() != Eigen::Success)
      throw domain_error("normal-equation factorization failed");
  }

  // P_L: nearest point of the affine graph; also materializes S(u), s, t.
  void project_affine(Eigen::VectorXd& ux, std::vector<Eigen::MatrixXd>& Sx,
                      Eigen::VectorXd& sx, Eigen::VectorXd& tx) {
    Eigen::VectorXd rhs = u_w_;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const ScaledBlock& sb = blocks_[b];
      for (const PsdCell& c : sb.src->cells) {
        double target = X_w_[b](c.row, c.col);
        double w = (c.row == c.col ? 1.0 : 2.0) / sb.kappa;
        for (const LinTerm& t : c.form)
          rhs[static_cast<Eigen::Index>(t.var)] += w * t.coeff * target;
      }
    }
    for (std::size_t r = 0; r < in_rows_.size(); ++r) {
      double target = s_w_[static_cast<Eigen::Index>(r)] + in_rows_[r].rhs;
      for (const LinTerm& t : in_rows_[r].form)
        rhs[static_cast<Eigen::Index>(t.var)] += t.coeff * target;
    }
    for (std::size_t r = 0; r < eq_rows_.size(); ++r) {
      double target = t_w_[static_cast<Eigen::Index>(r)] + eq_rows_[r].rhs;
      for (const LinTerm& t : eq_rows_[r].form)
        rhs[static_cast<Eigen::Index>(t.var)] += t.coeff * target;
    }
    ux = fact_.solve(rhs);
    Sx.resize(blocks_.size());
    parallel_for(blocks_.size(), [&](std::size_t b) {
      Sx[b] = materialize(blocks_[b], ux, blocks_[b].kappa);
    });
    sx.resize(static_cast<Eigen::Index>(in_rows_.size()));
    for (std::size_t r = 0; r < in_rows_.size(); ++r)
      sx[static_cast<Eigen::Index>(r)] = dot(in_rows_[r].form, ux) - in_rows_[r].rhs;
    tx.resize(static_cast<Eigen::Index>(eq_rows_.size()));
    for (std::size_t r = 0; r < eq_rows_.size(); ++r)
      tx[static_cast<Eigen::Index>(r)] = dot(eq_rows_[r].form, ux) - eq_rows_[r].rhs;
    ux_cache_ = ux;
  }

  // w <- w + rho (P_C(2x - w) - x)
  void advance(const std::vector<Eigen::MatrixXd>& Sx, const Eigen::VectorXd& sx,
               const Eigen::VectorXd& tx, double rho) {
    u_w_ += rho * (ux_cache_ - u_w_);
    parallel_for(blocks_.size(), [&](std::size_t b) {
      Eigen::MatrixXd refl = 2.0 * Sx[b] - X_w_[b];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(refl);
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      X_w_[b] += rho * (es.eigenvectors() * ev.asDiagonal() *
                            es.eigenvectors().transpose() -
                        Sx[b]);
    });
    s_w_ += rho * ((2.0 * sx - s_w_).cwiseMax(0.0) - sx);
    t_w_ -= rho * tx;
  }

  // One eigendecomposition per block: trace-scaled minimum eigenvalue plus
  // negative parts and near-active eigenvectors for the polish steps.
  void decompose(const std::vector<Eigen::MatrixXd>& Sx) {
    neg_parts_.resize(blocks_.size());
    eigvals_.resize(blocks_.size());
    eigvecs_.resize(blocks_.size());
    min_eigs_.resize(blocks_.size());
    parallel_for(blocks_.size(), [&](std::size_t b) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Sx[b]);
      eigvals_[b] = es.eigenvalues();
      eigvecs_[b] = es.eigenvectors();
      min_eigs_[b] =
          es.eigenvalues().minCoeff() / std::max(1.0, std::abs(Sx[b].trace()));
      Eigen::VectorXd neg = (-es.eigenvalues()).cwiseMax(0.0);
      neg_parts_[b] =
          es.eigenvectors() * neg.asDiagonal() * es.eigenvectors().transpose();
    });
    min_scaled_eig_ = 0.0;
    for (double e : min_eigs_) min_scaled_eig_ = std::min(min_scaled_eig_, e);
  }

  double cone_violation(const Eigen::VectorXd& sx, const Eigen::VectorXd& tx) const {
    double v = -min_scaled_eig_;
    if (sx.size()) v = std::max(v, -sx.minCoeff());
    if (tx.size()) v = std::max(v, tx.cwiseAbs().maxCoeff());
    return std::max(v, 0.0);
  }

  void finish_feasible(SolverOutcome& out, const Eigen::VectorXd& ux,
                       const Eigen::VectorXd& tx) const {
    out.tag = SolverOutcome::Tag::Feasible;
    out.moments.values.assign(ux.data(), ux.data() + n_);
    out.moments.affine_residual = tx.size() ? tx.cwiseAbs().maxCoeff() : 0.0;
    out.moments.min_block_eig = min_scaled_eig_;
  }

  double cone_worst_at(const Eigen::VectorXd& u) const {
    double worst = 0.0;
    for (const ScaledRow& r : eq_rows_)
      worst = std::max(worst, std::abs(dot(r.form, u) - r.rhs));
    for (const ScaledRow& r : in_rows_)
      worst = std::max(worst, r.rhs - dot(r.form, u));
    for (const ScaledBlock& sb : blocks_) {
      Eigen::MatrixXd mblk = materialize(sb, u, sb.kappa);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mblk, Eigen::EigenvaluesOnly);
      worst = std::max(worst, -es.eigenvalues().minCoeff() /
                                  std::max(1.0, std::abs(mblk.trace())));
    }
    return std::max(worst, 0.0);
  }

  // Guarded Newton refinement onto the feasible set: least-squares step that
  // zeroes the violated rows and eigenvalues, with a backtracking line search
  // so a step never trades one violation for a worse one.
  bool try_primal_polish(const Eigen::VectorXd& ux, const SolverConfig& cfg,
                         SolverOutcome& out) {
    Eigen::VectorXd u2 = ux;
    double worst = cone_worst_at(u2);
    for (int round = 0; round < 8; ++round) {
      if (worst <= cfg.tol_feas) break;
      std::vector<Eigen::Triplet<double>> trip;
      std::vector<double> target;
      auto lin_row = [&](const LinForm& f, double t) {
        int row = static_cast<int>(target.size());
        for (const LinTerm& lt : f)
          trip.emplace_back(row, static_cast<int>(lt.var), lt.coeff);
        target.push_back(t);
      };
      for (const ScaledRow& r : eq_rows_) {
        double resid = dot(r.form, u2) - r.rhs;
        if (resid != 0.0) lin_row(r.form, -resid);
      }
      for (const ScaledRow& r : in_rows_) {
        double slack = dot(r.form, u2) - r.rhs;
        if (slack < 0.0) lin_row(r.form, -slack);
      }
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const ScaledBlock& sb = blocks_[b];
        Eigen::MatrixXd mblk = materialize(sb, u2, sb.kappa);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mblk);
        for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
          double ev = es.eigenvalues()[k];
          if (ev >= 0.0) continue;
          int row = static_cast<int>(target.size());
          Eigen::VectorXd v = es.eigenvectors().col(k);
          for (const PsdCell& c : sb.src->cells) {
            double w = v[c.row] * v[c.col] * (c.row == c.col ? 1.0 : 2.0) / sb.kappa;
            if (w == 0.0) continue;
            for (const LinTerm& lt : c.form)
              trip.emplace_back(row, static_cast<int>(lt.var), w * lt.coeff);
          }
          target.push_back(-ev);
        }
      }
      if (target.empty()) break;

      const int m = static_cast<int>(target.size());
      SpMat C(m, static_cast<int>(n_));
      C.setFromTriplets(trip.begin(), trip.end());
      SpMat N = SpMat(C.transpose()) * C;
      for (int i = 0; i < N.rows(); ++i) N.coeffRef(i, i) += 1e-12;
      Eigen::SimplicialLDLT<SpMat> ls(N);
      if (ls.info() != Eigen::Success) return false;
      Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(target.data(), m);
      Eigen::VectorXd du = ls.solve(C.transpose() * t);

      bool moved = false;
      for (double theta : {1.0, 0.5, 0.25, 0.0625}) {
        Eigen::VectorXd cand = u2 + theta * du;
        double w2 = cone_worst_at(cand);
        if (w2 < 0.9 * worst) {
          u2 = cand;
          worst = w2;
          moved = true;
          break;
        }
      }
#ifdef SOSPL_POLISH_DEBUG
      std::fprintf(stderr, "polish round=%d worst=%.3e rows=%zu moved=%d\n", round,
                   worst, target.size(), int(moved));
#endif
      if (!moved) return false;
    }
    if (worst > cfg.tol_feas) return false;

    out.tag = SolverOutcome::Tag::Feasible;
    out.moments.values.assign(u2.data(), u2.data() + n_);
    double aff = 0.0;
    for (const ScaledRow& r : eq_rows_)
      aff = std::max(aff, std::abs(dot(r.form, u2) - r.rhs));
    out.moments.affine_residual = aff;
    double mineig = 0.0;
    for (const ScaledBlock& sb : blocks_) {
      Eigen::MatrixXd mblk = materialize(sb, u2, 1.0);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mblk, Eigen::EigenvaluesOnly);
      mineig = std::min(mineig, es.eigenvalues().minCoeff() /
                                    std::max(1.0, std::abs(mblk.trace())));
    }
    out.moments.min_block_eig = mineig;
    return true;
  }

  // Dual candidate from the cone displacement at the affine point. A
  // least-squares fit over the row multipliers and the near-active Gram
  // eigenface weights turns an approximate separating direction into an exact
  // Farkas combination, which is then verified in full.
  bool try_certificate(const Eigen::VectorXd& sx, const Eigen::VectorXd& tx,
                       const SolverConfig& cfg, double& best_screen,
                       SolverOutcome& out) {
    Eigen::VectorXd lam(static_cast<Eigen::Index>(in_rows_.size()));
    for (Eigen::Index r = 0; r < lam.size(); ++r) lam[r] = std::max(-sx[r], 0.0);
    Eigen::VectorXd mu = -tx;

    // near-active eigenface directions per block, weights init to the
    // negative part of the spectrum
    struct FaceDir {
      std::size_t block;
      Eigen::VectorXd vec;
      Eigen::VectorXd functional;  // S*(v v^T) over the moment variables
      double weight;
    };
    std::vector<FaceDir> faces;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      double scale_b = std::max(1.0, std::abs(eigvals_[b].sum()));
      for (Eigen::Index k = 0; k < eigvals_[b].size(); ++k) {
        double ev = eigvals_[b][k];
        if (ev > 1e-5 * scale_b) continue;
        FaceDir fd;
        fd.block = b;
        fd.vec = eigvecs_[b].col(k);
        fd.weight = std::max(-ev, 0.0);
        fd.functional = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        const ScaledBlock& sb = blocks_[b];
        for (const PsdCell& c : sb.src->cells) {
          double w = fd.vec[c.row] * fd.vec[c.col] * (c.row == c.col ? 1.0 : 2.0) /
                     sb.kappa;
          if (w == 0.0) continue;
          for (const LinTerm& t : c.form)
            fd.functional[static_cast<Eigen::Index>(t.var)] += w * t.coeff;
        }
        faces.push_back(std::move(fd));
      }
    }

    auto functional = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& m) {
      Eigen::VectorXd T = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
      for (const FaceDir& fd : faces)
        if (fd.weight != 0.0) T += fd.weight * fd.functional;
      for (std::size_t r = 0; r < in_rows_.size(); ++r) {
        if (l[static_cast<Eigen::Index>(r)] == 0.0) continue;
        for (const LinTerm& t : in_rows_[r].form)
          T[static_cast<Eigen::Index>(t.var)] +=
              l[static_cast<Eigen::Index>(r)] * t.coeff;
      }
      for (std::size_t r = 0; r < eq_rows_.size(); ++r) {
        if (m[static_cast<Eigen::Index>(r)] == 0.0) continue;
        for (const LinTerm& t : eq_rows_[r].form)
          T[static_cast<Eigen::Index>(t.var)] +=
              m[static_cast<Eigen::Index>(r)] * t.coeff;
      }
      return T;
    };
    auto value = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& m) {
      double V = 0.0;
      for (std::size_t r = 0; r < in_rows_.size(); ++r)
        V += l[static_cast<Eigen::Index>(r)] * in_rows_[r].rhs;
      for (std::size_t r = 0; r < eq_rows_.size(); ++r)
        V += m[static_cast<Eigen::Index>(r)] * eq_rows_[r].rhs;
      return V;
    };
    auto mult_scale = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& m) {
      double s = l.size() ? l.maxCoeff() : 0.0;
      if (m.size()) s = std::max(s, m.cwiseAbs().maxCoeff());
      for (const FaceDir& fd : faces) s = std::max(s, fd.weight);
      return s;
    };

    Eigen::VectorXd T = functional(lam, mu);
    double V = value(lam, mu);
    double scale = mult_scale(lam, mu);
    if (V <= 0.0 || scale <= 0.0) return false;
    double screen = T.cwiseAbs().maxCoeff() / std::max(V, scale);
    if (screen > 0.5) return false;
    if (screen > 0.7 * best_screen) return false;  // wait for visible progress
    best_screen = screen;

    // minimize || T + C d || over multiplier corrections, clip signs, refit
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<Eigen::Triplet<double>> trip;
      // column map: in-rows, then eq rows, then faces
      std::vector<int> cols;
      for (std::size_t r = 0; r < in_rows_.size(); ++r)
        if (pass == 0 || lam[static_cast<Eigen::Index>(r)] > 0.0)
          cols.push_back(static_cast<int>(r));
      const int eq_base = static_cast<int>(in_rows_.size());
      for (std::size_t r = 0; r < eq_rows_.size(); ++r)
        cols.push_back(eq_base + static_cast<int>(r));
      const int face_base = eq_base + static_cast<int>(eq_rows_.size());
      for (std::size_t fidx = 0; fidx < faces.size(); ++fidx)
        if (pass == 0 || faces[fidx].weight > 0.0)
          cols.push_back(face_base + static_cast<int>(fidx));

      for (std::size_t c = 0; c < cols.size(); ++c) {
        int id = cols[c];
        if (id < eq_base) {
          for (const LinTerm& t : in_rows_[static_cast<std::size_t>(id)].form)
            trip.emplace_back(static_cast<int>(t.var), static_cast<int>(c), t.coeff);
        } else if (id < face_base) {
          for (const LinTerm& t : eq_rows_[static_cast<std::size_t>(id - eq_base)].form)
            trip.emplace_back(static_cast<int>(t.var), static_cast<int>(c), t.coeff);
        } else {
          const Eigen::VectorXd& f = faces[static_cast<std::size_t>(id - face_base)].functional;
          for (Eigen::Index i = 0; i < f.size(); ++i)
            if (f[i] != 0.0) trip.emplace_back(static_cast<int>(i), static_cast<int>(c), f[i]);
        }
      }
      SpMat C(static_cast<int>(n_), static_cast<int>(cols.size()));
      C.setFromTriplets(trip.begin(), trip.end());
      SpMat N = SpMat(C.transpose()) * C;
      for (int i = 0; i < N.rows(); ++i) N.coeffRef(i, i) += 1e-12;
      Eigen::SimplicialLDLT<SpMat> ls(N);
      if (ls.info() != Eigen::Success) return false;
      Eigen::VectorXd d = ls.solve(-(C.transpose() * T));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        int id = cols[c];
        double delta = d[static_cast<Eigen::Index>(c)];
        if (id < eq_base)
          lam[id] += delta;
        else if (id < face_base)
          mu[id - eq_base] += delta;
        else
          faces[static_cast<std::size_t>(id - face_base)].weight += delta;
      }
      lam = lam.cwiseMax(0.0);
      for (FaceDir& fd : faces) fd.weight = std::max(fd.weight, 0.0);
      T = functional(lam, mu);
    }
    V = value(lam, mu);
    if (V <= 0.0) return false;
    scale = std::max(mult_scale(lam, mu), 1e-300);
    if (T.cwiseAbs().maxCoeff() > 1e-8 * std::max(scale, V)) return false;

    std::vector<Eigen::MatrixXd> grams(blocks_.size());
    for (const FaceDir& fd : faces) {
      if (fd.weight == 0.0) continue;
      if (grams[fd.block].size() == 0)
        grams[fd.block] = Eigen::MatrixXd::Zero(
            static_cast<Eigen::Index>(blocks_[fd.block].dim),
            static_cast<Eigen::Index>(blocks_[fd.block].dim));
      grams[fd.block] += fd.weight * fd.vec * fd.vec.transpose();
    }
    RefutationCertificate cert = assemble_certificate(lam, mu, grams);
    cert.constant = 0.0;
    VerifyReport raw = verify_certificate_program(cert, prog_, cfg.tol_cert);
    if (raw.constant <= 0.0) return false;
    double inv = 1.0 / raw.constant;
    for (GramBlock& g : cert.grams)
      for (double& e : g.entries) e *= inv;
    for (EqualityMultiplier& em : cert.eq_multipliers) em.multiplier *= inv;
    for (MomentBoundMultiplier& bm : cert.bound_multipliers) bm.lambda *= inv;
    for (LinkingMultiplier& lm : cert.linking) {
      lm.lambda_lower *= inv;
      lm.lambda_upper *= inv;
    }
    for (MarkerMultiplier& mm : cert.markers) mm.value *= inv;
    cert.constant = 1.0;
    VerifyReport rep = verify_certificate_program(cert, prog_, cfg.tol_cert);
    if (!rep.valid) return false;
    out.tag = SolverOutcome::Tag::Infeasible;
    out.certificate = std::move(cert);
    out.certificate_report = rep;
    return true;
  }

  RefutationCertificate assemble_certificate(
      const Eigen::VectorXd& lam, const Eigen::VectorXd& mu,
      const std::vector<Eigen::MatrixXd>& grams) const {
    RefutationCertificate cert;
    cert.degree = prog_.degree;
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const ScaledBlock& sb = blocks_[b];
      if (grams[b].size() == 0 || grams[b].cwiseAbs().maxCoeff() == 0.0) continue;
      GramBlock g;
      g.group = sb.src->group;
      g.constraint = sb.src->kind == BlockKind::Moment ? -1 : sb.src->constraint;
      g.dim = sb.dim;
      g.entries.resize(sb.dim * sb.dim);
      for (std::size_t i = 0; i < sb.dim; ++i)
        for (std::size_t j = 0; j < sb.dim; ++j)
          g.entries[i * sb.dim + j] = grams[b](static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)) /
                                      sb.kappa;
      cert.grams.push_back(std::move(g));
    }
    std::map<std::pair<std::int32_t, std::int32_t>, Polynomial> eq_polys;
    std::map<Monomial, LinkingMultiplier> linking;
    std::map<std::int32_t, double> bound_lambdas;
    for (std::size_t r = 0; r < in_rows_.size(); ++r) {
      double l = lam[static_cast<Eigen::Index>(r)] / in_rows_[r].eta;
      if (l == 0.0) continue;
      const AffineRow& row = *in_rows_[r].src;
      switch (row.origin) {
        case RowOrigin::MomentBound:
          bound_lambdas[row.constraint] += l;
          break;
        case RowOrigin::LinkingLower:
          linking[row.mono].alpha = row.mono;
          linking[row.mono].lambda_lower += l;
          break;
        case RowOrigin::LinkingUpper:
          linking[row.mono].alpha = row.mono;
          linking[row.mono].lambda_upper += l;
          break;
        case RowOrigin::IneqMarker:
          cert.markers.push_back({row.group, row.constraint, false, l});
          break;
        default:
          break;
      }
    }
    for (std::size_t r = 0; r < eq_rows_.size(); ++r) {
      double m = mu[static_cast<Eigen::Index>(r)] / eq_rows_[r].eta;
      if (m == 0.0) continue;
      const AffineRow& row = *eq_rows_[r].src;
      switch (row.origin) {
        case RowOrigin::EqualityConstraint:
          eq_polys[{row.group, row.constraint}].add_term(row.mono, m);
          break;
        case RowOrigin::EqMarker:
          cert.markers.push_back({row.group, row.constraint, true, -m});
          break;
        case RowOrigin::Normalization:
        default:
          break;  // absorbed into the expansion constant
      }
    }
    for (auto& [key, poly] : eq_polys)
      cert.eq_multipliers.push_back({key.first, key.second, std::move(poly)});
    for (auto& [bound, l] : bound_lambdas) cert.bound_multipliers.push_back({bound, l});
    for (auto& [alpha, lm] : linking) cert.linking.push_back(lm);
    return cert;
  }

  const SosProgram& prog_;
  std::size_t n_ = 0;
  std::vector<ScaledBlock> blocks_;
  std::vector<ScaledRow> eq_rows_, in_rows_;
  Eigen::SimplicialLDLT<SpMat> fact_;

  Eigen::VectorXd u_w_, s_w_, t_w_, ux_cache_;
  std::vector<Eigen::MatrixXd> X_w_;
  std::vector<Eigen::MatrixXd> neg_parts_;
  std::vector<Eigen::VectorXd> eigvals_;
  std::vector<Eigen::MatrixXd> eigvecs_;
  std::vector<double> min_eigs_;
  double min_scaled_eig_ = 0.0;
};

}  // namespace detail

// Decides feasibility of the program. Infeasible is only returned with a
// certificate that passed full polynomial verification.
inline SolverOutcome solve(const SosProgram& prog, const SolverConfig& cfg = {}) {
  detail::SplitSolver solver(prog);
  return solver.run(cfg);
}

// Violations of the program's rows and blocks at a given moment vector.
inline ResidualReport evaluate_point(const SosProgram& prog,
                                     const std::vector<double>& values) {
  detail::SplitSolver solver(prog);
  Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  return solver.residuals_at(u);
}

// Warm bisection prober: the base program plus one moment-bound row on the
// level polynomial whose threshold can be rebound between solves.
class LevelProbe {
public:
  LevelProbe(const SosProgram& base, const Polynomial& p, BoundDir dir)
      : prog_(base), dir_(dir) {
    add_moment_bound_row(prog_, {p, dir, 0.0});
    bound_index_ = static_cast<std::int32_t>(prog_.moment_bounds.size() - 1);
    solver_.emplace(prog_);
  }

  SolverOutcome solve_at(double level, const SolverConfig& cfg) {
    prog_.moment_bounds[static_cast<std::size_t>(bound_index_)].gamma = level;
    prog_.rows.back().rhs = dir_ == BoundDir::LessEq ? -level : level;
    solver_->set_probe_level(bound_index_, prog_.rows.back().rhs);
    return solver_->run(cfg);
  }

  const SosProgram& program() const { return prog_; }
  std::int32_t bound_index() const { return bound_index_; }

  // value of the probe polynomial at a witness
  double value_at(const PseudoMoments& m) const {
    const MomentBound& mb = prog_.moment_bounds[static_cast<std::size_t>(bound_index_)];
    Polynomial red = reduce(mb.poly, prog_.variables);
    double v = 0.0;
    for (const auto& [mono, coeff] : red.terms())
      v += coeff * m.values[prog_.var_index(0, mono)];
    return v;
  }

private:
  SosProgram prog_;
  BoundDir dir_;
  std::int32_t bound_index_ = 0;
  std::optional<detail::SplitSolver> solver_;
};

struct OptimizeResult {
  enum class Status : std::uint8_t { Converged, Infeasible, Indeterminate } status =
      Status::Indeterminate;
  Interval value;  // [attained, certified] bracket around the optimum
  PseudoMoments witness;
  RefutationCertificate certificate;  // when the base program is infeasible
  long total_iterations = 0;
};

// Bisection on the objective level against the feasibility engine. Rejected
// levels carry verified certificates whose probe multiplier sharpens the
// bracket beyond the midpoint.
inline OptimizeResult optimize(const SosProgram& prog, const SolverConfig& cfg = {}) {
  if (!prog.has_objective) throw domain_error("optimize: no objective attached");
  OptimizeResult res;
  SolverOutcome base = solve(prog, cfg);
  res.total_iterations = base.iterations;
  if (base.infeasible()) {
    res.status = OptimizeResult::Status::Infeasible;
    res.certificate = base.certificate;
    return res;
  }
  if (!base.feasible()) return res;

  auto objective_value = [&](const PseudoMoments& m) {
    double v = 0.0;
    for (const LinTerm& t : prog.objective) v += t.coeff * m.values[t.var];
    return v;
  };
  Interval box = expression_bounds(prog.objective_poly, prog.variables);
  res.witness = base.moments;
  double attained = objective_value(base.moments);
  const bool maximize = prog.maximize;
  double lo = maximize ? std::min(attained, box.hi) : box.lo;
  double hi = maximize ? box.hi : std::max(attained, box.lo);

  LevelProbe probe(prog, prog.objective_poly,
                   maximize ? BoundDir::GreaterEq : BoundDir::LessEq);
  SolverConfig probe_cfg = cfg;
  int stalls = 0;
  while (hi - lo > cfg.tol_gap) {
    double mid = 0.5 * (lo + hi);
    SolverOutcome r = probe.solve_at(mid, probe_cfg);
    res.total_iterations += r.iterations;
    if (r.feasible()) {
      double v = objective_value(r.moments);
      res.witness = r.moments;
      if (maximize)
        lo = std::clamp(std::max(mid, v), lo, hi);
      else
        hi = std::clamp(std::min(mid, v), lo, hi);
    } else if (r.infeasible()) {
      double sharpened = mid;
      for (const MomentBoundMultiplier& bm : r.certificate.bound_multipliers)
        if (bm.bound == probe.bound_index() && bm.lambda > 0.0)
          sharpened = maximize ? mid - 1.0 / bm.lambda : mid + 1.0 / bm.lambda;
      if (maximize)
        hi = std::clamp(sharpened, lo, mid);
      else
        lo = std::clamp(sharpened, mid, hi);
    } else {
      if (stalls < 2) {
        probe_cfg.max_iter *= 4;
        ++stalls;
        continue;
      }
      res.value = {lo, hi};
      res.status = OptimizeResult::Status::Indeterminate;
      return res;
    }
  }
  res.value = {lo, hi};
  res.status = OptimizeResult::Status::Converged;
  return res;
}

}  // namespace sospl
