#ifndef NETDYN_KDTREE_HPP
#define NETDYN_KDTREE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace netdyn {

/// Componentwise squared Euclidean distance, accumulated in ascending axis
/// order. Every distance in the toolkit goes through this one loop so that
/// alternative search paths produce bit-identical comparisons.
inline double squared_distance(const double* a, const double* b, std::size_t dim)
{
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return sum;
}

/// Static k-d tree over a fixed low-dimensional point set, tuned for exact
/// nearest-neighbor queries with deterministic results: exact distance ties
/// resolve to the smaller point index, and subtrees at exactly the best
/// distance are still visited so such ties cannot be pruned away.
class KdTree {
public:
    /// `data` is row-major count x dim and must outlive the tree.
    KdTree(const double* data, std::size_t count, std::size_t dim);

    struct Hit {
        std::size_t index;
        double dist2;
    };

    /// Nearest neighbor of the in-set point `query`, excluding itself and
    /// every index with |index - query| <= exclusion (Theiler window).
    /// nullopt when no admissible point exists.
    std::optional<Hit> nearest(std::size_t query, std::size_t exclusion) const;

    std::size_t size() const { return count_; }

private:
    struct Node {
        int axis = -1; ///< -1 marks a leaf
        double split = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::uint32_t begin = 0; ///< leaf range into order_
        std::uint32_t end = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::uint32_t node_id, const double* q, std::size_t query,
                std::size_t exclusion, Hit& best) const;

    const double* data_;
    std::size_t count_;
    std::size_t dim_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace netdyn

#endif // NETDYN_KDTREE_HPP
