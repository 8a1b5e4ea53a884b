#include "lrp/box.hpp"

#include <limits>
#include <stdexcept>

namespace lrp {

BoxShape BoxShape::cube(int dim, std::int32_t side) {
  BoxShape s;
  s.sides.assign(static_cast<std::size_t>(dim), side);
  s.origin.assign(static_cast<std::size_t>(dim), 0);
  s.validate();
  return s;
}

BoxShape BoxShape::rect(std::vector<std::int32_t> sides) {
  BoxShape s;
  s.sides = std::move(sides);
  s.origin.assign(s.sides.size(), 0);
  s.validate();
  return s;
}

std::int64_t BoxShape::vertex_count() const {
  std::int64_t n = 1;
  for (std::int32_t s : sides) n *= s;
  return n;
}

bool BoxShape::is_cube() const {
  for (std::int32_t s : sides)
    if (s != sides.front()) return false;
  return true;
}

void BoxShape::validate() const {
  if (sides.empty()) throw std::invalid_argument("box: dimension must be >= 1");
  if (origin.size() != sides.size())
    throw std::invalid_argument("box: origin size does not match dimension");
  std::int64_t count = 1;
  for (std::int32_t s : sides) {
    if (s < 2) throw std::invalid_argument("box: side length must be >= 2");
    count *= s;
    if (count > std::numeric_limits<VertexId>::max())
      throw std::invalid_argument("box: vertex count exceeds index type");
  }
}

BoxIndexer::BoxIndexer(const BoxShape& shape)
    : sides_(shape.sides), strides_(shape.sides.size()), count_(shape.vertex_count()) {
  std::int64_t stride = 1;
  for (int i = dim() - 1; i >= 0; --i) {
    strides_[static_cast<std::size_t>(i)] = stride;
    stride *= sides_[static_cast<std::size_t>(i)];
  }
}

VertexId BoxIndexer::index(std::span<const std::int32_t> coords) const {
  std::int64_t idx = 0;
  for (int i = 0; i < dim(); ++i) idx += coords[static_cast<std::size_t>(i)] * strides_[static_cast<std::size_t>(i)];
  return static_cast<VertexId>(idx);
}

void BoxIndexer::coords(VertexId v, std::span<std::int32_t> out) const {
  std::int64_t rest = v;
  for (int i = 0; i < dim(); ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(rest / strides_[static_cast<std::size_t>(i)]);
    rest %= strides_[static_cast<std::size_t>(i)];
  }
}

bool BoxIndexer::on_boundary(VertexId v) const {
  std::int64_t rest = v;
  for (int i = 0; i < dim(); ++i) {
    std::int32_t c = static_cast<std::int32_t>(rest / strides_[static_cast<std::size_t>(i)]);
    rest %= strides_[static_cast<std::size_t>(i)];
    if (c == 0 || c == sides_[static_cast<std::size_t>(i)] - 1) return true;
  }
  return false;
}

}  // namespace lrp
