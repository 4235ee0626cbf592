#include "srland/reference.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "srland/errors.hpp"

namespace srland::ref {

NeighborTable brute_knn(const double* data, std::int64_t n, std::int64_t dim, int k) {
    if (k < 1 || k >= n) throw usage_error("brute_knn: need 1 <= k < n");
    NeighborTable table;
    table.n = n;
    table.k = k;
    table.idx.resize(static_cast<std::size_t>(n) * k);
    table.dist2.resize(static_cast<std::size_t>(n) * k);
    std::vector<std::pair<double, std::int32_t>> all(static_cast<std::size_t>(n - 1));
    for (std::int64_t i = 0; i < n; ++i) {
        std::size_t filled = 0;
        for (std::int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            all[filled++] = {row_distance2(data + i * dim, data + j * dim, dim),
                             static_cast<std::int32_t>(j)};
        }
        std::sort(all.begin(), all.end());
        for (int t = 0; t < k; ++t) {
            table.idx[static_cast<std::size_t>(i) * k + t] = all[static_cast<std::size_t>(t)].second;
            table.dist2[static_cast<std::size_t>(i) * k + t] = all[static_cast<std::size_t>(t)].first;
        }
    }
    return table;
}

std::vector<double> brute_rho_raw(const RowMatrix& e, const std::vector<double>& p) {
    std::int64_t n = e.rows;
    std::int64_t argmax = 0;
    for (std::int64_t i = 1; i < n; ++i) {
        if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(argmax)]) argmax = i;
    }
    std::vector<double> raw(static_cast<std::size_t>(n), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        if (i == argmax) {
            double far2 = 0;
            for (std::int64_t j = 0; j < n; ++j) {
                far2 = std::max(far2, row_distance2(e.row(i), e.row(j), e.cols));
            }
            raw[static_cast<std::size_t>(i)] = std::sqrt(far2);
        } else {
            double best2 = -1;
            for (std::int64_t j = 0; j < n; ++j) {
                if (j == i || p[static_cast<std::size_t>(j)] < p[static_cast<std::size_t>(i)]) continue;
                double d2 = row_distance2(e.row(i), e.row(j), e.cols);
                if (best2 < 0 || d2 < best2) best2 = d2;
            }
            raw[static_cast<std::size_t>(i)] = std::sqrt(best2);
        }
    }
    return raw;
}

double brute_bandwidth(const double* data, std::int64_t n, std::int64_t dim, int k) {
    NeighborTable table = brute_knn(data, n, dim, k);
    double sum = 0;
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (int t = 0; t < k; ++t) {
            sum += std::sqrt(table.distances2(i)[t]);
            ++count;
        }
    }
    return 0.5 * sum / static_cast<double>(count);
}

std::vector<double> brute_kde(const double* data, std::int64_t n, std::int64_t dim, int k,
                              double sigma0) {
    NeighborTable table = brute_knn(data, n, dim, k);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        double acc = 0;
        for (int t = 0; t < k; ++t) {
            acc += std::exp(-table.distances2(i)[t] / (sigma0 * sigma0));
        }
        p[static_cast<std::size_t>(i)] = acc;
    }
    double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= total;
    return p;
}

std::vector<double> brute_boundary(const RowMatrix& e, const std::vector<std::int32_t>& modes) {
    std::int64_t n = e.rows;
    std::vector<double> out(static_cast<std::size_t>(n));
    std::vector<std::pair<double, std::int32_t>> dist(modes.size());
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < modes.size(); ++s) {
            dist[s] = {std::sqrt(row_distance2(e.row(i), e.row(modes[s]), e.cols)), modes[s]};
        }
        std::sort(dist.begin(), dist.end());
        out[static_cast<std::size_t>(i)] = std::fabs(dist[0].first - dist[1].first);
    }
    return out;
}

std::vector<std::int32_t> brute_ball(const GridShape& grid, std::int64_t i, double r) {
    std::vector<std::int32_t> out;
    double r2 = r * r;
    for (std::int64_t j = 0; j < grid.points(); ++j) {
        double dy = static_cast<double>(grid.row_of(j) - grid.row_of(i));
        double dx = static_cast<double>(grid.col_of(j) - grid.col_of(i));
        if (dy * dy + dx * dx <= r2) out.push_back(static_cast<std::int32_t>(j));
    }
    return out;
}

DensePairs dense_eigenpairs(const MarkovChain& chain, int m) {
    std::int64_t n = chain.n;
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t e = chain.row_ptr[static_cast<std::size_t>(i)]; e < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
            std::int64_t j = chain.col[static_cast<std::size_t>(e)];
            s(i, j) = chain.transition[static_cast<std::size_t>(e)] *
                      std::sqrt(chain.degree[static_cast<std::size_t>(i)] / chain.degree[static_cast<std::size_t>(j)]);
        }
    }
    s = 0.5 * (s + s.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success) throw numeric_error("dense eigensolve failed");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = std::fabs(es.eigenvalues()(a)), mb = std::fabs(es.eigenvalues()(b));
        if (ma != mb) return ma > mb;
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });

    DensePairs out;
    out.eigenvalues.resize(static_cast<std::size_t>(m));
    out.psi.rows = n;
    out.psi.cols = m;
    out.psi.data.resize(static_cast<std::size_t>(n) * m);
    for (int t = 0; t < m; ++t) {
        int c = order[static_cast<std::size_t>(t)];
        out.eigenvalues[static_cast<std::size_t>(t)] = es.eigenvalues()(c);
        Eigen::VectorXd v = es.eigenvectors().col(c);
        std::int64_t arg = 0;
        for (std::int64_t i = 1; i < n; ++i) {
            if (std::fabs(v(i)) > std::fabs(v(arg))) arg = i;
        }
        if (v(arg) < 0) v = -v;
        for (std::int64_t i = 0; i < n; ++i) {
            out.psi.at(i, t) = v(i) / std::sqrt(chain.stationary[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

std::vector<double> dense_transition_row(const MarkovChain& chain, std::int64_t t, std::int64_t i) {
    std::int64_t n = chain.n;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (std::int64_t u = 0; u < n; ++u) {
        for (std::int64_t e = chain.row_ptr[static_cast<std::size_t>(u)]; e < chain.row_ptr[static_cast<std::size_t>(u) + 1]; ++e) {
            p(u, chain.col[static_cast<std::size_t>(e)]) = chain.transition[static_cast<std::size_t>(e)];
        }
    }
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (std::int64_t s = 0; s < t; ++s) power = (power * p).eval();
    std::vector<double> row(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = power(i, j);
    return row;
}

BruteMetrics brute_metrics(const std::vector<std::int32_t>& predicted, const GroundTruth& truth) {
    std::map<std::int32_t, int> id;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth.labels[i] <= 0) continue;
        id.emplace(truth.labels[i], 0);
        id.emplace(predicted[i], 0);
    }
    int next = 0;
    for (auto& [label, slot] : id) slot = next++;
    int c = next;
    std::vector<std::int64_t> confusion(static_cast<std::size_t>(c) * c, 0);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth.labels[i] <= 0) continue;
        ++confusion[static_cast<std::size_t>(id[truth.labels[i]]) * c + id[predicted[i]]];
        ++total;
    }

    BruteMetrics out;
    std::int64_t diag = 0;
    for (int a = 0; a < c; ++a) diag += confusion[static_cast<std::size_t>(a) * c + a];
    out.oa = static_cast<double>(diag) / static_cast<double>(total);

    double recall_sum = 0;
    int classes = 0;
    for (int a = 0; a < c; ++a) {
        std::int64_t support = 0;
        for (int b = 0; b < c; ++b) support += confusion[static_cast<std::size_t>(a) * c + b];
        if (support == 0) continue;
        recall_sum += static_cast<double>(confusion[static_cast<std::size_t>(a) * c + a]) / static_cast<double>(support);
        ++classes;
    }
    out.aa = recall_sum / static_cast<double>(classes);

    double pe = 0;
    for (int a = 0; a < c; ++a) {
        std::int64_t rowsum = 0, colsum = 0;
        for (int b = 0; b < c; ++b) {
            rowsum += confusion[static_cast<std::size_t>(a) * c + b];
            colsum += confusion[static_cast<std::size_t>(b) * c + a];
        }
        pe += (static_cast<double>(rowsum) / static_cast<double>(total)) *
              (static_cast<double>(colsum) / static_cast<double>(total));
    }
    if (pe >= 1.0) {
        out.kappa = out.oa >= 1.0 ? 1.0 : 0.0;
    } else {
        out.kappa = (out.oa - pe) / (1.0 - pe);
    }
    return out;
}

void serial_spmv(const MarkovChain& chain, const double* x, double* y) {
    for (std::int64_t i = 0; i < chain.n; ++i) {
        double acc = 0;
        for (std::int64_t e = chain.row_ptr[static_cast<std::size_t>(i)]; e < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++e) {
            acc += chain.transition[static_cast<std::size_t>(e)] * x[chain.col[static_cast<std::size_t>(e)]];
        }
        y[i] = acc;
    }
}

std::vector<double> serial_kde_raw(const NeighborTable& table, double sigma0) {
    std::vector<double> out(static_cast<std::size_t>(table.n));
    for (std::int64_t i = 0; i < table.n; ++i) {
        double acc = 0;
        for (int t = 0; t < table.k; ++t) {
            acc += std::exp(-table.distances2(i)[t] / (sigma0 * sigma0));
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

}  // namespace srland::ref
