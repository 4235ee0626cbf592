#include "srland/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "srland/errors.hpp"
#include "srland/matrix.hpp"

namespace srland {
namespace {

struct Candidate {
    double d2;
    std::int32_t idx;
};

// Total order on candidates: nearer first, lower index on exact ties. The
// whole module leans on this order being total, so both search strategies
// land on the same table bit for bit.
inline bool better(const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return a.idx < b.idx;
}

// Bounded max-heap of the k best candidates seen so far (worst at front).
class KBest {
  public:
    explicit KBest(int k) : k_(k) { heap_.reserve(static_cast<std::size_t>(k)); }

    bool full() const { return static_cast<int>(heap_.size()) == k_; }
    const Candidate& worst() const { return heap_.front(); }

    // Caller-supplied proof that the kth neighbor lies within sqrt(b) of the
    // query; lets the tree prune boxes before the heap has even filled.
    void set_bound(double b) { bound_ = b; }

    // Squared distance beyond which no node can improve the final answer.
    double prune_d2() const {
        if (!full()) return bound_;
        return std::min(heap_.front().d2, bound_);
    }

    void offer(const Candidate& c) {
        if (!full()) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end(), better);
        } else if (better(c, heap_.front())) {
            std::pop_heap(heap_.begin(), heap_.end(), better);
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end(), better);
        }
    }

    // Drains the heap into ascending (d2, idx) order.
    std::vector<Candidate> sorted() {
        std::sort(heap_.begin(), heap_.end(), better);
        return std::move(heap_);
    }

  private:
    int k_;
    double bound_ = std::numeric_limits<double>::infinity();
    std::vector<Candidate> heap_;
};

constexpr int kLeafSize = 24;

struct KdNode {
    std::int32_t left = -1;    // -1 marks a leaf
    std::int32_t right = -1;
    std::int32_t begin = 0;    // range into perm (leaves only)
    std::int32_t end = 0;
    int split_dim = 0;
    double split_val = 0.0;
    std::int32_t bbox = 0;     // offset into the packed lo/hi box array
};

class KdTree {
  public:
    KdTree(const double* data, std::int64_t n, std::int64_t dim)
        : data_(data), dim_(dim), perm_(static_cast<std::size_t>(n)) {
        for (std::int64_t i = 0; i < n; ++i) perm_[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i);
        nodes_.reserve(static_cast<std::size_t>(2 * n / kLeafSize + 8));
        boxes_.reserve(nodes_.capacity() * 2 * static_cast<std::size_t>(dim));
        root_ = build(0, static_cast<std::int32_t>(n));
    }

    void query(const double* q, std::int64_t exclude, KBest& best) const {
        search(root_, q, exclude, best);
    }

    // Points sorted so that tree leaves are contiguous; consecutive entries
    // are spatial neighbors, which makes warm-started all-kNN sweeps cheap.
    const std::vector<std::int32_t>& ordered() const { return perm_; }

  private:
    std::int32_t build(std::int32_t begin, std::int32_t end) {
        std::int32_t id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        nodes_[id].bbox = static_cast<std::int32_t>(boxes_.size());
        // Bounding box of the range: drives both the split choice and the
        // query-time distance pruning.
        boxes_.resize(boxes_.size() + 2 * static_cast<std::size_t>(dim_));
        double* lo = boxes_.data() + nodes_[id].bbox;
        double* hi = lo + dim_;
        for (int d = 0; d < dim_; ++d) {
            lo[d] = hi[d] = data_[static_cast<std::int64_t>(perm_[begin]) * dim_ + d];
        }
        for (std::int32_t t = begin + 1; t < end; ++t) {
            const double* p = data_ + static_cast<std::int64_t>(perm_[t]) * dim_;
            for (int d = 0; d < dim_; ++d) {
                lo[d] = std::min(lo[d], p[d]);
                hi[d] = std::max(hi[d], p[d]);
            }
        }
        int dim = 0;
        double widest = -1.0;
        for (int d = 0; d < dim_; ++d) {
            if (hi[d] - lo[d] > widest) {
                widest = hi[d] - lo[d];
                dim = d;
            }
        }
        if (end - begin <= kLeafSize || widest <= 0.0) {
            // Small range, or all remaining points coincide.
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }
        std::int32_t mid = begin + (end - begin) / 2;
        const double* data = data_;
        std::int64_t stride = dim_;
        std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                         [data, stride, dim](std::int32_t a, std::int32_t b) {
                             double va = data[static_cast<std::int64_t>(a) * stride + dim];
                             double vb = data[static_cast<std::int64_t>(b) * stride + dim];
                             if (va != vb) return va < vb;
                             return a < b;
                         });
        double split_val = data_[static_cast<std::int64_t>(perm_[mid]) * dim_ + dim];
        std::int32_t left = build(begin, mid);
        std::int32_t right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        nodes_[id].split_dim = dim;
        nodes_[id].split_val = split_val;
        return id;
    }

    // Squared distance from q to the node's bounding box (0 inside).
    double box_dist2(const KdNode& node, const double* q) const {
        const double* lo = boxes_.data() + node.bbox;
        const double* hi = lo + dim_;
        double acc = 0.0;
        for (int d = 0; d < dim_; ++d) {
            double g = lo[d] - q[d];
            if (g < 0.0) g = q[d] - hi[d];
            if (g > 0.0) acc += g * g;
        }
        return acc;
    }

    void search(std::int32_t id, const double* q, std::int64_t exclude, KBest& best) const {
        const KdNode& node = nodes_[id];
        // An equal box distance can still hide an equal-distance lower index,
        // so only a strictly farther box is pruned.
        if (box_dist2(node, q) > best.prune_d2()) return;
        if (node.left < 0) {
            for (std::int32_t t = node.begin; t < node.end; ++t) {
                std::int32_t j = perm_[t];
                if (j == exclude) continue;
                double d2 = row_distance2(q, data_ + static_cast<std::int64_t>(j) * dim_, dim_);
                best.offer({d2, j});
            }
            return;
        }
        double diff = q[node.split_dim] - node.split_val;
        std::int32_t near = diff <= 0.0 ? node.left : node.right;
        std::int32_t far = diff <= 0.0 ? node.right : node.left;
        search(near, q, exclude, best);
        search(far, q, exclude, best);
    }

    const double* data_;
    std::int64_t dim_;
    std::vector<std::int32_t> perm_;
    std::vector<KdNode> nodes_;
    std::vector<double> boxes_;  // per node: dim_ lows then dim_ highs
    std::int32_t root_ = 0;
};

void brute_query(const double* data, std::int64_t n, std::int64_t dim, const double* q,
                 std::int64_t exclude, KBest& best) {
    for (std::int64_t j = 0; j < n; ++j) {
        if (j == exclude) continue;
        double d2 = row_distance2(q, data + j * dim, dim);
        best.offer({d2, static_cast<std::int32_t>(j)});
    }
}

bool use_tree(std::int64_t n, std::int64_t dim) { return dim <= 64 && n >= 512; }

}  // namespace

NeighborTable knn_exact(const double* data, std::int64_t n, std::int64_t dim, int k) {
    if (k < 1 || k >= n) {
        throw usage_error("knn: need 1 <= k < n (k=" + std::to_string(k) +
                          ", n=" + std::to_string(n) + ")");
    }
    NeighborTable table;
    table.n = n;
    table.k = k;
    table.idx.assign(static_cast<std::size_t>(n) * k, -1);
    table.dist2.assign(static_cast<std::size_t>(n) * k, 0.0);

    if (use_tree(n, dim)) {
        KdTree tree(data, n, dim);
        const auto& order = tree.ordered();
        // Sweep queries in leaf order, carrying a warm-start radius along the
        // chain: the previous point's k answers (plus the previous point
        // itself) are k candidates within prev_kth + step of the current
        // query by the triangle inequality, so the kth neighbor provably lies
        // within that radius and the tree can prune boxes beyond it from the
        // start. Only the bound is carried — results stay exact.
        constexpr std::int64_t kChain = 64;
        std::int64_t chains = (n + kChain - 1) / kChain;
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t c = 0; c < chains; ++c) {
            std::int32_t prev = -1;
            double prev_kth = 0.0;
            std::int64_t stop = std::min(n, (c + 1) * kChain);
            for (std::int64_t t = c * kChain; t < stop; ++t) {
                std::int32_t i = order[static_cast<std::size_t>(t)];
                const double* q = data + static_cast<std::int64_t>(i) * dim;
                KBest best(k);
                if (prev >= 0) {
                    double step2 = row_distance2(q, data + static_cast<std::int64_t>(prev) * dim, dim);
                    double reach = std::sqrt(prev_kth) + std::sqrt(step2);
                    // Tiny inflation so rounding in the sqrt/add/square chain
                    // can never shave the bound below the true kth distance.
                    best.set_bound(reach * reach * (1.0 + 1e-12));
                }
                tree.query(q, i, best);
                auto ranked = best.sorted();
                for (int r = 0; r < k; ++r) {
                    table.idx[static_cast<std::size_t>(i) * k + r] = ranked[static_cast<std::size_t>(r)].idx;
                    table.dist2[static_cast<std::size_t>(i) * k + r] = ranked[static_cast<std::size_t>(r)].d2;
                }
                prev = i;
                prev_kth = ranked[static_cast<std::size_t>(k - 1)].d2;
            }
        }
    } else {
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < n; ++i) {
            KBest best(k);
            brute_query(data, n, dim, data + i * dim, i, best);
            auto ranked = best.sorted();
            for (int t = 0; t < k; ++t) {
                table.idx[static_cast<std::size_t>(i) * k + t] = ranked[static_cast<std::size_t>(t)].idx;
                table.dist2[static_cast<std::size_t>(i) * k + t] = ranked[static_cast<std::size_t>(t)].d2;
            }
        }
    }
    return table;
}

std::vector<std::int32_t> knn_query(const double* data, std::int64_t n, std::int64_t dim,
                                    const double* query, int k, std::int64_t exclude) {
    std::int64_t available = n - (exclude >= 0 ? 1 : 0);
    if (k < 1 || k > available) {
        throw usage_error("knn_query: need 1 <= k <= " + std::to_string(available));
    }
    KBest best(k);
    brute_query(data, n, dim, query, exclude, best);
    auto ranked = best.sorted();
    std::vector<std::int32_t> out(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) out[static_cast<std::size_t>(t)] = ranked[static_cast<std::size_t>(t)].idx;
    return out;
}

}  // namespace srland
