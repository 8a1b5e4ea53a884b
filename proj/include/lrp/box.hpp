#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lrp {

// Vertex indices are 32-bit; BoxShape::validate rejects boxes whose vertex
// count does not fit.
using VertexId = std::int32_t;

// Finite axis-aligned box of lattice sites. Sides may differ per axis
// (elongated boxes for distance-only experiments). The origin offset shifts
// the lattice labels of the sites but not the internal indexing.
struct BoxShape {
  std::vector<std::int32_t> sides;
  std::vector<std::int64_t> origin;

  static BoxShape cube(int dim, std::int32_t side);
  static BoxShape rect(std::vector<std::int32_t> sides);

  int dim() const { return static_cast<int>(sides.size()); }
  std::int64_t vertex_count() const;
  bool is_cube() const;
  void validate() const;

  bool operator==(const BoxShape&) const = default;
};

// Row-major indexing, axis 0 slowest. Precomputes strides once.
class BoxIndexer {
 public:
  explicit BoxIndexer(const BoxShape& shape);

  int dim() const { return static_cast<int>(sides_.size()); }
  std::int32_t side(int axis) const { return sides_[axis]; }
  std::int64_t vertex_count() const { return count_; }

  VertexId index(std::span<const std::int32_t> coords) const;
  void coords(VertexId v, std::span<std::int32_t> out) const;
  bool on_boundary(VertexId v) const;

 private:
  std::vector<std::int32_t> sides_;
  std::vector<std::int64_t> strides_;
  std::int64_t count_;
};

}  // namespace lrp
