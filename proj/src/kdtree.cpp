#include "sts/kdtree.hpp"

#include <algorithm>
#include <cassert>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace sts {

namespace {

double axis_value(const Coordinate& c, int axis) {
    return axis == 0 ? c.lat : c.lon;
}

// Strict total order on points for one split axis. Unique image ids make
// this a total order, which pins the tree structure regardless of input
// order.
struct AxisLess {
    int axis;
    bool operator()(const IndexedPoint& a, const IndexedPoint& b) const {
        const double av = axis_value(a.coord, axis);
        const double bv = axis_value(b.coord, axis);
        if (av != bv) return av < bv;
        const double ao = axis_value(a.coord, 1 - axis);
        const double bo = axis_value(b.coord, 1 - axis);
        if (ao != bo) return ao < bo;
        return a.image_id < b.image_id;
    }
};

// Worse-first order on candidates: larger distance, then larger image id.
// Used both for the bounded candidate heap and for the final ascending sort.
bool candidate_less(const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.point.image_id < b.point.image_id;
}

struct BoundedBest {
    std::size_t k;
    // Max-heap: top() is the current worst kept candidate.
    std::priority_queue<Neighbor, std::vector<Neighbor>,
                        bool (*)(const Neighbor&, const Neighbor&)>
        heap{candidate_less};

    bool full() const { return heap.size() == k; }

    // True if a candidate at (dist, id) would be kept right now.
    bool admits(double dist, const std::string& id) const {
        if (heap.size() < k) return true;
        const Neighbor& worst = heap.top();
        if (dist != worst.distance) return dist < worst.distance;
        return id < worst.point.image_id;
    }

    void offer(Neighbor n) {
        if (heap.size() < k) {
            heap.push(std::move(n));
        } else if (admits(n.distance, n.point.image_id)) {
            heap.pop();
            heap.push(std::move(n));
        }
    }
};

}  // namespace

KdTree KdTree::build(std::vector<IndexedPoint> points) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(points.size());
    for (const auto& p : points) {
        if (!seen.insert(p.image_id).second) {
            throw std::runtime_error("kdtree: duplicate image_id '" +
                                     p.image_id + "'");
        }
    }
    KdTree tree;
    tree.nodes_.reserve(points.size());
    if (!points.empty()) {
        tree.root_ = tree.build_range(points, 0, points.size(), 0);
    }
    return tree;
}

std::int32_t KdTree::build_range(std::vector<IndexedPoint>& pts,
                                 std::size_t lo, std::size_t hi, int axis) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(pts.begin() + lo, pts.begin() + mid, pts.begin() + hi,
                     AxisLess{axis});
    const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{std::move(pts[mid]), -1, -1});
    if (mid > lo) nodes_[id].left = build_range(pts, lo, mid, 1 - axis);
    if (mid + 1 < hi) nodes_[id].right = build_range(pts, mid + 1, hi, 1 - axis);
    return id;
}

std::size_t KdTree::depth() const {
    if (root_ < 0) return 0;
    // Iterative depth over the explicit node array.
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{root_, 1}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [idx, level] = stack.back();
        stack.pop_back();
        best = std::max(best, level);
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.left >= 0) stack.push_back({n.left, level + 1});
        if (n.right >= 0) stack.push_back({n.right, level + 1});
    }
    return best;
}

std::vector<Neighbor> KdTree::query_knn_within(const Coordinate& q,
                                               std::size_t k, double d,
                                               DistanceMetric metric) const {
    if (k < 1) throw std::invalid_argument("kdtree: k must be >= 1");
    if (!(d >= 0.0)) throw std::invalid_argument("kdtree: d must be >= 0");
    if (root_ < 0) return {};

    BoundedBest best{k};

    // Per-axis pruning margins in degrees. For the degree metric the margin
    // is the radius itself, shrunk to the current k-th best once the
    // candidate set is full. For haversine the margins stay derived from the
    // fixed d: latitude uses a conservative 111 km/degree, longitude widens
    // the latitude band by the margin before taking the cosine (qualifying
    // points can sit anywhere in that band) and clamps it away from the
    // poles; every visited point is then filtered by the exact formula.
    double lat_margin = 0.0;
    double lon_margin = 0.0;
    if (metric == DistanceMetric::HaversineKm) {
        constexpr double kKmPerDegreeLat = 111.0;
        lat_margin = d / kKmPerDegreeLat;
        const double band_lat = std::min(89.99, std::abs(q.lat) + lat_margin);
        const double cos_band = std::max(
            0.01, std::cos(band_lat * 3.141592653589793238462643383279502884 /
                           180.0));
        lon_margin = lat_margin / cos_band;
    }

    auto margin_for = [&](int axis) {
        if (metric == DistanceMetric::DegreeEuclidean) {
            return best.full() ? std::min(d, best.heap.top().distance) : d;
        }
        return axis == 0 ? lat_margin : lon_margin;
    };

    auto visit = [&](auto&& self, std::int32_t idx, int axis) -> void {
        if (idx < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(idx)];
        const double dist = distance(metric, q, node.point.coord);
        if (dist <= d && best.admits(dist, node.point.image_id)) {
            best.offer(Neighbor{node.point, dist});
        }
        const double gap = axis_value(q, axis) - axis_value(node.point.coord, axis);
        const std::int32_t near = gap <= 0.0 ? node.left : node.right;
        const std::int32_t far = gap <= 0.0 ? node.right : node.left;
        self(self, near, 1 - axis);
        // Inclusive far-side bound: a point at exactly the margin can still
        // beat the current worst on the image-id tie-break.
        if (std::abs(gap) <= margin_for(axis)) {
            self(self, far, 1 - axis);
        }
    };
    visit(visit, root_, 0);

    std::vector<Neighbor> result;
    result.reserve(best.heap.size());
    while (!best.heap.empty()) {
        result.push_back(best.heap.top());
        best.heap.pop();
    }
    std::reverse(result.begin(), result.end());
    return result;
}

std::vector<IndexedPoint> KdTree::collect() const {
    std::vector<IndexedPoint> out;
    out.reserve(nodes_.size());
    auto walk = [&](auto&& self, std::int32_t idx) -> void {
        if (idx < 0) return;
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        self(self, n.left);
        out.push_back(n.point);
        self(self, n.right);
    };
    walk(walk, root_);
    return out;
}

}  // namespace sts
