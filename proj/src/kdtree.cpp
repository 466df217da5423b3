#include "netdyn/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace netdyn {

namespace {
constexpr std::uint32_t kLeafSize = 16;
constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();
} // namespace

KdTree::KdTree(const double* data, std::size_t count, std::size_t dim)
    : data_(data), count_(count), dim_(dim)
{
    order_.resize(count_);
    for (std::size_t i = 0; i < count_; ++i)
        order_[i] = static_cast<std::uint32_t>(i);
    if (count_ > 0)
        build(0, static_cast<std::uint32_t>(count_));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end)
{
    const auto node_id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});

    int axis = -1;
    double spread = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
        double lo = data_[order_[begin] * dim_ + j];
        double hi = lo;
        for (std::uint32_t i = begin + 1; i < end; ++i) {
            const double v = data_[order_[i] * dim_ + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > spread) {
            spread = hi - lo;
            axis = static_cast<int>(j);
        }
    }

    // All points identical (spread 0 on every axis) also end up as a leaf.
    if (end - begin <= kLeafSize || axis < 0) {
        Node& leaf = nodes_[node_id];
        leaf.axis = -1;
        leaf.begin = begin;
        leaf.end = end;
        return node_id;
    }

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double va = data_[a * dim_ + axis];
                         const double vb = data_[b * dim_ + axis];
                         if (va != vb)
                             return va < vb;
                         return a < b; // deterministic layout for duplicates
                     });

    const double split = data_[order_[mid] * dim_ + axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    Node& node = nodes_[node_id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return node_id;
}

void KdTree::search(std::uint32_t node_id, const double* q, std::size_t query,
                    std::size_t exclusion, Hit& best) const
{
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::size_t p = order_[i];
            const std::size_t gap = p > query ? p - query : query - p;
            if (gap <= exclusion)
                continue;
            const double d2 = squared_distance(q, data_ + p * dim_, dim_);
            if (d2 < best.dist2 || (d2 == best.dist2 && p < best.index)) {
                best.dist2 = d2;
                best.index = p;
            }
        }
        return;
    }

    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff < 0 ? node.left : node.right;
    const std::uint32_t far = diff < 0 ? node.right : node.left;
    search(near, q, query, exclusion, best);
    // <= keeps exact-tie candidates reachable: a smaller index at the same
    // distance on the far side must still win.
    if (diff * diff <= best.dist2)
        search(far, q, query, exclusion, best);
}

std::optional<KdTree::Hit> KdTree::nearest(std::size_t query,
                                           std::size_t exclusion) const
{
    if (count_ == 0)
        return std::nullopt;
    Hit best{kNoIndex, std::numeric_limits<double>::infinity()};
    search(0, data_ + query * dim_, query, exclusion, best);
    if (best.index == kNoIndex)
        return std::nullopt;
    return best;
}

} // namespace netdyn
