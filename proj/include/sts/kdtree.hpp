#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sts/geo.hpp"

namespace sts {

struct IndexedPoint {
    std::string image_id;  // unique within one index build
    Coordinate coord;
};

struct Neighbor {
    IndexedPoint point;
    double distance = 0.0;
};

// 2-D KD-tree over image-center coordinates.
//
// Structure: alternating split axis (lat at even depth, lon at odd depth),
// split at the median under the total order (axis value, other-axis value,
// image_id), so construction is deterministic. Points equal to the node on
// the split axis may land on either side; search pruning therefore uses
// inclusive bounds on both sides.
//
// Immutable after build; concurrent read queries are safe.
class KdTree {
public:
    KdTree() = default;

    // O(n log n) median-split construction. Throws on duplicate image ids.
    static KdTree build(std::vector<IndexedPoint> points);

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    // Number of node levels (empty tree: 0, single node: 1).
    std::size_t depth() const;

    // The k nearest points to q within distance d (inclusive), sorted by
    // (distance, image_id) ascending. k must be >= 1 and d >= 0; an empty
    // tree yields an empty result.
    std::vector<Neighbor> query_knn_within(const Coordinate& q, std::size_t k,
                                           double d,
                                           DistanceMetric metric) const;

    // All points, in-order (left subtree, node, right subtree).
    std::vector<IndexedPoint> collect() const;

private:
    struct Node {
        IndexedPoint point;
        std::int32_t left = -1;
        std::int32_t right = -1;
    };

    std::int32_t build_range(std::vector<IndexedPoint>& pts, std::size_t lo,
                             std::size_t hi, int axis);

    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace sts
