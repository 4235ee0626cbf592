#include "srland/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "srland/errors.hpp"
#include "srland/knn.hpp"
#include "srland/rng.hpp"

namespace srland {
namespace {

// Symmetrized walk operator S = D^{1/2} P D^{-1/2}; same spectrum as P,
// orthonormal eigenbasis, touched only through apply().
struct SymOp {
    std::int64_t n = 0;
    const std::vector<std::int64_t>* row_ptr = nullptr;
    const std::vector<std::int32_t>* col = nullptr;
    std::vector<double> val;

    explicit SymOp(const MarkovChain& chain)
        : n(chain.n), row_ptr(&chain.row_ptr), col(&chain.col), val(chain.transition.size()) {
        std::vector<double> root(static_cast<std::size_t>(n));
        for (std::int64_t i = 0; i < n; ++i) root[static_cast<std::size_t>(i)] = std::sqrt(chain.degree[static_cast<std::size_t>(i)]);
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            for (std::int64_t e = (*row_ptr)[static_cast<std::size_t>(i)]; e < (*row_ptr)[static_cast<std::size_t>(i) + 1]; ++e) {
                val[static_cast<std::size_t>(e)] = chain.transition[static_cast<std::size_t>(e)] * root[static_cast<std::size_t>(i)] /
                                                   root[static_cast<std::size_t>((*col)[static_cast<std::size_t>(e)])];
            }
        }
    }

    void apply(const double* x, double* y) const {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::int64_t e = (*row_ptr)[static_cast<std::size_t>(i)]; e < (*row_ptr)[static_cast<std::size_t>(i) + 1]; ++e) {
                acc += val[static_cast<std::size_t>(e)] * x[(*col)[static_cast<std::size_t>(e)]];
            }
            y[i] = acc;
        }
    }
};

double dot(const double* a, const double* b, std::int64_t n) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const double* a, std::int64_t n) { return std::sqrt(dot(a, a, n)); }

struct RitzOrder {
    double value;
    int column;
};

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Thick-restart Lanczos on S. The orthonormal basis V is carried together
// with its image W = S V, so the projected matrix B = V'SV and every Ritz
// residual ||W y - theta V y|| come from stored products instead of tail
// estimates. On grid graphs the top of the spectrum is clustered enough that
// a four-digit product count is simply what resolving it to the default
// tolerance costs, so the constant work around each product is what decides
// the wall time: a chain append S v_j arrives with its Gram-Schmidt
// coefficients already sitting in column j of B (the first pass needs no
// inner products), the mop-up pass repeats only when cancellation actually
// happened, and restart rotations are dense GEMMs instead of axpy sweeps.
class Lanczos {
  public:
    Lanczos(const SymOp& op, int m, const EigsOptions& opts)
        : op_(op), n_(op.n), m_(m), opts_(opts) {
        k_ = static_cast<int>(std::min<std::int64_t>(n_, std::max(2 * m + 8, 64)));
        if (const char* e = std::getenv("SRLAND_EIGS_K"))
            k_ = static_cast<int>(std::min<std::int64_t>(n_, std::atoi(e)));
        keep_extra_ = 8;
        if (const char* e = std::getenv("SRLAND_EIGS_KEEP")) keep_extra_ = std::atoi(e);
        budget_ = static_cast<std::int64_t>(opts.matvecs_per_pair) * m * m;
        basis_.assign(static_cast<std::size_t>(k_) * n_, 0.0);
        image_.assign(static_cast<std::size_t>(k_) * n_, 0.0);
        proj_.assign(static_cast<std::size_t>(k_) * k_, 0.0);
        rng_ = Rng(derive_seed(opts.seed, 11));
    }

    // Returns (eigenvalues, eigenvectors as rows) of S, largest |lambda| first.
    std::pair<std::vector<double>, RowMatrix> run();

  private:
    double* vec(int j) { return basis_.data() + static_cast<std::size_t>(j) * n_; }
    double* img(int j) { return image_.data() + static_cast<std::size_t>(j) * n_; }
    double& proj(int i, int j) { return proj_[static_cast<std::size_t>(i) * k_ + j]; }

    Eigen::Map<const RowMat> rows(const std::vector<double>& buf, int count) const {
        return {buf.data(), count, static_cast<Eigen::Index>(n_)};
    }

    void random_fill(double* v) {
        for (std::int64_t i = 0; i < n_; ++i) v[i] = rng_.gaussian();
    }

    // One modified-Gram-Schmidt pass of w against basis rows [0, count);
    // returns the norm of w afterwards. Row-at-a-time keeps each basis row's
    // second touch (the axpy right after the dot) in cache, so the basis
    // streams from memory once per pass instead of twice.
    double gs_pass(double* w, int count) {
        for (int i = 0; i < count; ++i) {
            const double* v = vec(i);
            double h = dot(v, w, n_);
            if (h != 0.0) {
                for (std::int64_t j = 0; j < n_; ++j) w[j] -= h * v[j];
            }
        }
        return norm2(w, n_);
    }

    // True if a fresh random direction orthogonal to [0, count) was produced.
    bool replace_with_random(double* w, int count) {
        for (int attempt = 0; attempt < 5; ++attempt) {
            random_fill(w);
            double norm = norm2(w, n_);
            if (norm <= 0.0) continue;
            Eigen::Map<Eigen::VectorXd>(w, n_) /= norm;
            double after = gs_pass(w, count);
            if (after < 0.5) after = gs_pass(w, count);
            if (after > 1e-8) {
                Eigen::Map<Eigen::VectorXd>(w, n_) /= after;
                return true;
            }
        }
        return false;
    }

    const SymOp& op_;
    std::int64_t n_;
    int m_;
    EigsOptions opts_;
    int k_ = 0;
    int keep_extra_ = 8;
    std::int64_t budget_ = 0;
    std::int64_t used_ = 0;
    std::vector<double> basis_;   // k_ x n row-major, orthonormal rows
    std::vector<double> image_;   // k_ x n, image_[j] = S * basis_[j]
    std::vector<double> proj_;    // k_ x k_, B = V' S V
    Rng rng_{0};
};

std::pair<std::vector<double>, RowMatrix> Lanczos::run() {
    std::size_t bytes = sizeof(double) * static_cast<std::size_t>(n_);
    std::vector<double> work(static_cast<std::size_t>(n_));
    std::vector<double> cont(static_cast<std::size_t>(n_));

    constexpr double kEps = 2.2e-16;
    constexpr double kEta = 0.7071;    // cancellation test on the three-term remainder
    constexpr double kOmegaCap = 3e-9; // semi-orthogonality budget, ~sqrt(eps)

    random_fill(vec(0));
    double nrm = norm2(vec(0), n_);
    for (std::int64_t i = 0; i < n_; ++i) vec(0)[i] /= nrm;
    int filled = 1;
    bool img_pending = true;  // image and diagonal entry of row filled-1 not yet formed
    double omega = kEps;      // running bound on worst lost orthogonality
    bool force_full = false;  // re-orthogonalization pending for the partner step

    // Finish row filled-1: its image under S and the diagonal projection
    // entry. Off-diagonal entries of its column are already in place (beta
    // from the append that made it, arrow entries from a restart) — by the
    // Lanczos relation everything else is zero, which is what partial
    // re-orthogonalization banks on.
    auto complete_last_img = [&] {
        if (!img_pending) return;
        int j = filled - 1;
        op_.apply(vec(j), img(j));
        ++used_;
        proj(j, j) = dot(vec(j), img(j), n_);
        img_pending = false;
    };

    // Next chain direction from row filled-1 into w: subtract the known
    // couplings (its projection column), then re-orthogonalize in full only
    // when the remainder cancelled hard or the drift bound overflows.
    // Returns the remainder norm.
    auto next_chain = [&](double* w) {
        int j = filled - 1;
        std::memcpy(w, img(j), bytes);
        double before = norm2(w, n_);
        for (int i = 0; i < filled; ++i) {
            double c = proj(i, j);
            if (c == 0.0) continue;
            const double* v = vec(i);
            for (std::int64_t x = 0; x < n_; ++x) w[x] -= c * v[x];
        }
        double beta = norm2(w, n_);
        omega = (2.0 * omega + kEps) / std::max(beta, kEps);
        // Cancellation itself is harmless until the lost digits approach the
        // orthogonality budget; the omega recurrence already charges 1/beta
        // per step, so the hard test only guards catastrophic collapse.
        // Full passes come in consecutive pairs: the three-term recurrence
        // feeds off two previous vectors, and cleaning only one lets the
        // other re-seed the drift at the cap instead of at epsilon.
        if (force_full || beta < 1e-6 * before || omega > kOmegaCap) {
            double b2 = gs_pass(w, filled);
            if (b2 < kEta * beta) b2 = gs_pass(w, filled);
            beta = b2;
            force_full = !force_full;
            omega = kEps;
        }
        return beta;
    };

    while (true) {
        bool exhausted_space = false;
        while (filled < k_ && used_ < budget_) {
            complete_last_img();
            int j = filled - 1;
            double* d = vec(filled);
            double beta = next_chain(d);
            if (beta > 1e-13) {
                for (std::int64_t x = 0; x < n_; ++x) d[x] /= beta;
                proj(j, filled) = beta;
                proj(filled, j) = beta;
            } else if (filled >= n_ || !replace_with_random(d, filled)) {
                // Invariant subspace and no orthogonal direction left: the
                // Rayleigh-Ritz below is exact on what we have. (A random
                // replacement needs no column entries: S maps the exhausted
                // chain into itself up to the <=1e-13 discarded remainder,
                // so its couplings are at noise level.)
                exhausted_space = true;
                break;
            }
            ++filled;
            img_pending = true;
        }
        complete_last_img();

        // Rayleigh-Ritz on the projected block.
        Eigen::MatrixXd block(filled, filled);
        for (int i = 0; i < filled; ++i) {
            for (int j = 0; j < filled; ++j) block(i, j) = proj(i, j);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
        if (es.info() != Eigen::Success) throw numeric_error("projected eigensolve failed");

        std::vector<RitzOrder> order(static_cast<std::size_t>(filled));
        for (int c = 0; c < filled; ++c) order[static_cast<std::size_t>(c)] = {es.eigenvalues()(c), c};
        std::sort(order.begin(), order.end(), [](const RitzOrder& a, const RitzOrder& b) {
            double ma = std::fabs(a.value), mb = std::fabs(b.value);
            if (ma != mb) return ma > mb;
            if (a.value != b.value) return a.value > b.value;
            return a.column < b.column;
        });

        int want = std::min(m_, filled);
        // Leave room for the continuation vector so the next sweep resumes
        // the same Krylov chain — but never drop below the wanted count: at
        // m = n the full basis is the answer.
        int keep = exhausted_space ? filled : std::min(filled - 2, m_ + keep_extra_);
        if (keep < want) keep = want;

        // Continuation vector: the next Lanczos direction of the chain being
        // retired, formed before the rotation discards the tail. Carrying it
        // preserves the Krylov relation across the restart; every kept Ritz
        // residual is parallel to it.
        bool have_cont = false;
        if (!exhausted_space && keep < filled) {
            double cb = next_chain(cont.data());
            if (cb > 1e-13) {
                for (std::int64_t x = 0; x < n_; ++x) cont[static_cast<std::size_t>(x)] /= cb;
                have_cont = true;
            }
        }

        // Rotate basis and image into the leading Ritz directions; afterwards
        // row t is the t-th Ritz vector and its stored image is S times it.
        {
            Eigen::MatrixXd coeff(filled, keep);
            for (int t = 0; t < keep; ++t) {
                int c = order[static_cast<std::size_t>(t)].column;
                for (int j = 0; j < filled; ++j) coeff(j, t) = es.eigenvectors()(j, c);
            }
            RowMat fvec = coeff.transpose() * rows(basis_, filled);
            RowMat fimg = coeff.transpose() * rows(image_, filled);
            std::memcpy(basis_.data(), fvec.data(), static_cast<std::size_t>(keep) * n_ * sizeof(double));
            std::memcpy(image_.data(), fimg.data(), static_cast<std::size_t>(keep) * n_ * sizeof(double));
        }
        std::fill(proj_.begin(), proj_.end(), 0.0);
        for (int t = 0; t < keep; ++t) proj(t, t) = order[static_cast<std::size_t>(t)].value;
        filled = keep;
        want = std::min(want, filled);

        bool converged = true;
        double worst = 0.0;
        for (int t = 0; t < want; ++t) {
            double theta = order[static_cast<std::size_t>(t)].value;
            double acc = 0.0;
            const double* v = vec(t);
            const double* w = img(t);
            for (std::int64_t i = 0; i < n_; ++i) {
                double r = w[i] - theta * v[i];
                acc += r * r;
            }
            double res = std::sqrt(acc);
            worst = std::max(worst, res);
            if (res > opts_.tol) converged = false;
        }
        if (exhausted_space) converged = true;
        if (std::getenv("SRLAND_EIGS_TRACE")) {
            std::fprintf(stderr, "[trace] used=%lld filled=%d want=%d worst=%.3e\n",
                         (long long)used_, filled, want, worst);
        }
        // A budget-truncated first sweep can leave fewer Ritz pairs than
        // asked for; that is non-convergence, not an answer.
        if (want < m_ && !exhausted_space) converged = false;

        if (converged) {
            if (want < m_) {
                // Only reachable by exhausting a degenerate invariant
                // subspace; a connected chain always has full rank.
                throw numeric_error("eigensolver exhausted an invariant subspace of dimension " +
                                    std::to_string(want) + " before reaching m");
            }
            RowMatrix vectors;
            vectors.rows = want;
            vectors.cols = n_;
            vectors.data.assign(static_cast<std::size_t>(want) * n_, 0.0);
            std::vector<double> values(static_cast<std::size_t>(want));
            for (int t = 0; t < want; ++t) {
                values[static_cast<std::size_t>(t)] = order[static_cast<std::size_t>(t)].value;
                double* out = vectors.row(t);
                std::memcpy(out, vec(t), bytes);
                double vn = norm2(out, n_);
                for (std::int64_t i = 0; i < n_; ++i) out[i] /= vn;
            }
            // Verify with fresh products; rotations could in principle have
            // drifted the stored images.
            double true_worst = 0.0;
            for (int t = 0; t < want; ++t) {
                op_.apply(vectors.row(t), work.data());
                ++used_;
                double resinf = 0.0;
                for (std::int64_t i = 0; i < n_; ++i) {
                    resinf = std::max(resinf, std::fabs(work[static_cast<std::size_t>(i)] -
                                                        values[static_cast<std::size_t>(t)] * vectors.row(t)[i]));
                }
                std::memcpy(img(t), work.data(), bytes);  // refreshed image
                true_worst = std::max(true_worst, resinf);
            }
            if (true_worst <= 1e-8 || exhausted_space) {
                return {std::move(values), std::move(vectors)};
            }
            converged = false;  // estimates lied; keep iterating if we can
        }

        if (used_ >= budget_) {
            std::ostringstream msg;
            msg << "eigensolver failed to converge within " << budget_ << " matrix-vector products"
                << " (worst residual estimate " << worst << ", tolerance " << opts_.tol << ")";
            throw numeric_error(msg.str());
        }

        if (have_cont) {
            double* d = vec(filled);
            std::memcpy(d, cont.data(), bytes);
            // Arrow couplings of the carried-over direction against the kept
            // Ritz rows, via their stored images (exact whatever drift the
            // chain construction mopped up).
            for (int t = 0; t < filled; ++t) {
                double c = dot(img(t), d, n_);
                proj(t, filled) = c;
                proj(filled, t) = c;
            }
            ++filled;
            img_pending = true;
        } else {
            // Nothing to continue from (all residuals at noise level or the
            // space ran out); the next sweep reseeds randomly via the
            // breakdown path if it runs at all.
            img_pending = false;
        }
        omega = kEps;

        // Pathological stall guard: a full basis that still fails the
        // tolerance (say tol = 0 with keep == k_) would otherwise loop
        // without spending budget. Freeing a slot forces a matvec per cycle.
        if (filled >= k_ && k_ > 1) filled = k_ - 1;
    }
}

}  // namespace

DiffusionModel top_eigenpairs(const MarkovChain& chain, int m, const EigsOptions& opts) {
    if (m < 1 || m > chain.n) throw usage_error("need 1 <= m <= n eigenpairs");
    SymOp op(chain);
    Lanczos solver(op, m, opts);
    auto [values, vectors] = solver.run();

    // Sign convention: largest-magnitude entry positive (first such entry on
    // exact ties). Makes eigenvectors unique and runs comparable.
    for (int t = 0; t < vectors.rows; ++t) {
        double* v = vectors.row(t);
        std::int64_t arg = 0;
        double best = std::fabs(v[0]);
        for (std::int64_t i = 1; i < chain.n; ++i) {
            double a = std::fabs(v[i]);
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (v[arg] < 0) {
            for (std::int64_t i = 0; i < chain.n; ++i) v[i] = -v[i];
        }
    }

    DiffusionModel model;
    model.n = chain.n;
    model.m = m;
    model.eigenvalues = std::move(values);
    model.psi.rows = chain.n;
    model.psi.cols = m;
    model.psi.data.resize(static_cast<std::size_t>(chain.n) * m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < chain.n; ++i) {
        double scale = 1.0 / std::sqrt(chain.stationary[static_cast<std::size_t>(i)]);
        for (int t = 0; t < m; ++t) {
            model.psi.at(i, t) = vectors.at(t, i) * scale;
        }
    }
    return model;
}

void embed(DiffusionModel& model, std::int64_t t) {
    if (t < 0) throw usage_error("diffusion time must be a nonnegative integer");
    model.time = t;
    std::vector<double> powers(static_cast<std::size_t>(model.m));
    for (int j = 0; j < model.m; ++j) {
        double lam = std::clamp(model.eigenvalues[static_cast<std::size_t>(j)], -1.0, 1.0);
        powers[static_cast<std::size_t>(j)] = std::pow(lam, static_cast<double>(t));
    }
    model.embedding.rows = model.n;
    model.embedding.cols = model.m;
    model.embedding.data.resize(static_cast<std::size_t>(model.n) * model.m);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < model.n; ++i) {
        for (int j = 0; j < model.m; ++j) {
            model.embedding.at(i, j) = powers[static_cast<std::size_t>(j)] * model.psi.at(i, j);
        }
    }
}

double diffusion_distance(const DiffusionModel& model, std::int64_t i, std::int64_t j) {
    if (model.embedding.empty()) throw usage_error("embed() must run before distance queries");
    return std::sqrt(row_distance2(model.embedding.row(i), model.embedding.row(j), model.m));
}

double diffusion_distance_exact(const MarkovChain& chain, std::int64_t t, std::int64_t i,
                                std::int64_t j) {
    if (chain.n > 2000) {
        throw usage_error("exact transition-profile distance is a small-n oracle (n <= 2000); "
                          "use the spectral embedding path");
    }
    if (t < 0) throw usage_error("diffusion time must be a nonnegative integer");
    std::size_t n = static_cast<std::size_t>(chain.n);
    auto propagate = [&](std::int64_t source) {
        std::vector<double> row(n, 0.0), next(n);
        row[static_cast<std::size_t>(source)] = 1.0;
        for (std::int64_t step = 0; step < t; ++step) {
            std::fill(next.begin(), next.end(), 0.0);
            for (std::int64_t u = 0; u < chain.n; ++u) {
                double mass = row[static_cast<std::size_t>(u)];
                if (mass == 0.0) continue;
                for (std::int64_t e = chain.row_ptr[static_cast<std::size_t>(u)]; e < chain.row_ptr[static_cast<std::size_t>(u) + 1]; ++e) {
                    next[static_cast<std::size_t>(chain.col[static_cast<std::size_t>(e)])] += mass * chain.transition[static_cast<std::size_t>(e)];
                }
            }
            row.swap(next);
        }
        return row;
    };
    std::vector<double> a = propagate(i), b = propagate(j);
    double acc = 0.0, comp = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        double diff = a[u] - b[u];
        double term = diff * diff / chain.stationary[u];
        double y = term - comp;
        double s = acc + y;
        comp = (s - acc) - y;
        acc = s;
    }
    return std::sqrt(acc);
}

std::vector<std::int32_t> dt_nearest(const RowMatrix& e, std::int64_t i, int count) {
    return knn_query(e.data.data(), e.rows, e.cols, e.row(i), count, i);
}

}  // namespace srland
