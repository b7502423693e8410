#pragma once

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/linalg.hpp"
#include "ridgepath/parallel.hpp"

namespace ridgepath {

enum class LayoutKind { RowWise, FullMatrix, Recursive };

inline std::string_view to_string(LayoutKind kind) {
  switch (kind) {
    case LayoutKind::RowWise: return "rowwise";
    case LayoutKind::FullMatrix: return "full";
    case LayoutKind::Recursive: return "recursive";
  }
  return "?";
}

inline LayoutKind parse_layout_kind(std::string_view s) {
  if (s == "rowwise" || s == "row-wise" || s == "row") return LayoutKind::RowWise;
  if (s == "full" || s == "full-matrix" || s == "fullmatrix") return LayoutKind::FullMatrix;
  if (s == "recursive" || s == "rec") return LayoutKind::Recursive;
  throw InvalidArgument("unknown layout '" + std::string(s) + "'");
}

/// A run of consecutive lower-triangular entries that lands contiguously in
/// the output vector. Column runs are contiguous in the column-major source
/// as well; row runs are strided.
struct CopySegment {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t count = 0;
  std::size_t offset = 0;
  bool along_column = false;
};

/// Bijection between lower-triangular positions of an h x h matrix and
/// vector indices.
///
/// Recursive layouts place the square block below the diagonal split first
/// (column-major), then the top-left triangle, then the bottom-right
/// triangle, each recursively until the block order is at most h0, where
/// row-wise packing takes over. Odd orders give the top-left triangle the
/// extra row.
class VecLayout {
 public:
  VecLayout() = default;

  LayoutKind kind() const noexcept { return kind_; }
  std::size_t h() const noexcept { return h_; }
  std::size_t h0() const noexcept { return h0_; }
  std::size_t length() const noexcept { return length_; }
  std::span<const CopySegment> segments() const noexcept { return segments_; }

  /// Vector index for every position (p, q), stored at [p + q * h]; -1 for
  /// positions the layout does not store.
  std::vector<std::ptrdiff_t> index_map() const {
    std::vector<std::ptrdiff_t> map(h_ * h_, -1);
    if (kind_ == LayoutKind::FullMatrix) {
      for (std::size_t k = 0; k < h_ * h_; ++k) map[k] = static_cast<std::ptrdiff_t>(k);
      return map;
    }
    for (const auto& s : segments_) {
      for (std::size_t k = 0; k < s.count; ++k) {
        const std::size_t p = s.along_column ? s.row + k : s.row;
        const std::size_t q = s.along_column ? s.col : s.col + k;
        map[p + q * h_] = static_cast<std::ptrdiff_t>(s.offset + k);
      }
    }
    return map;
  }

  friend VecLayout build_layout(LayoutKind kind, std::size_t h, std::size_t h0);

 private:
  void add_rowwise_block(std::size_t origin, std::size_t order, std::size_t& offset) {
    for (std::size_t i = 0; i < order; ++i) {
      segments_.push_back({origin + i, origin, i + 1, offset, false});
      offset += i + 1;
    }
  }

  void add_recursive_block(std::size_t origin, std::size_t order, std::size_t& offset) {
    if (order == 0) return;
    if (order <= h0_) {
      add_rowwise_block(origin, order, offset);
      return;
    }
    const std::size_t top = (order + 1) / 2;
    const std::size_t bottom = order - top;
    for (std::size_t c = 0; c < top; ++c) {
      segments_.push_back({origin + top, origin + c, bottom, offset, true});
      offset += bottom;
    }
    add_recursive_block(origin, top, offset);
    add_recursive_block(origin + top, bottom, offset);
  }

  LayoutKind kind_ = LayoutKind::RowWise;
  std::size_t h_ = 0;
  std::size_t h0_ = 0;
  std::size_t length_ = 0;
  std::vector<CopySegment> segments_;
};

inline constexpr std::size_t kDefaultRecursionThreshold = 64;

inline VecLayout build_layout(LayoutKind kind, std::size_t h,
                              std::size_t h0 = kDefaultRecursionThreshold) {
  if (h < 1) throw InvalidArgument("layout order must be >= 1");
  if (kind == LayoutKind::Recursive && h0 < 1) {
    throw InvalidThreshold("recursion threshold h0 must be >= 1");
  }
  VecLayout layout;
  layout.kind_ = kind;
  layout.h_ = h;
  layout.h0_ = kind == LayoutKind::Recursive ? h0 : 0;
  std::size_t offset = 0;
  switch (kind) {
    case LayoutKind::RowWise:
      layout.add_rowwise_block(0, h, offset);
      layout.length_ = offset;
      break;
    case LayoutKind::Recursive:
      layout.add_recursive_block(0, h, offset);
      layout.length_ = offset;
      break;
    case LayoutKind::FullMatrix:
      // Lower part of each column; the strict upper part stays zero.
      for (std::size_t q = 0; q < h; ++q) {
        layout.segments_.push_back({q, q, h - q, q * h + q, true});
      }
      layout.length_ = h * h;
      break;
  }
  return layout;
}

namespace detail {

inline void gather_into(const DenseMatrix& l, const VecLayout& layout, double* out) {
  const std::size_t h = layout.h();
  const double* src = l.data();
  if (layout.kind() == LayoutKind::FullMatrix) std::fill(out, out + layout.length(), 0.0);
  for (const auto& s : layout.segments()) {
    if (s.along_column) {
      std::memcpy(out + s.offset, src + s.row + s.col * h, s.count * sizeof(double));
    } else {
      const double* p = src + s.row + s.col * h;
      double* o = out + s.offset;
      for (std::size_t k = 0; k < s.count; ++k) o[k] = p[k * h];
    }
  }
}

inline void scatter_from(std::span<const double> v, const VecLayout& layout, DenseMatrix& l) {
  const std::size_t h = layout.h();
  double* dst = l.data();
  for (const auto& s : layout.segments()) {
    if (s.along_column) {
      std::memcpy(dst + s.row + s.col * h, v.data() + s.offset, s.count * sizeof(double));
    } else {
      double* p = dst + s.row + s.col * h;
      const double* in = v.data() + s.offset;
      for (std::size_t k = 0; k < s.count; ++k) p[k * h] = in[k];
    }
  }
}

inline void require_order(std::size_t dim, const VecLayout& layout) {
  if (dim != layout.h()) {
    throw DimensionMismatch("factor order " + std::to_string(dim) + " != layout order " +
                            std::to_string(layout.h()));
  }
}

}  // namespace detail

inline Vector vectorize(const CholeskyFactor& l, const VecLayout& layout) {
  detail::require_order(l.dim(), layout);
  Vector out(layout.length());
  detail::gather_into(l.matrix(), layout, out.data());
  return out;
}

/// Inverse of vectorize. Strict-upper positions of the result are zero.
inline CholeskyFactor unvectorize(std::span<const double> v, const VecLayout& layout) {
  if (v.size() != layout.length()) {
    throw DimensionMismatch("vector length " + std::to_string(v.size()) +
                            " != layout length " + std::to_string(layout.length()));
  }
  DenseMatrix l(layout.h(), layout.h());
  detail::scatter_from(v, layout, l);
  return CholeskyFactor(std::move(l));
}

/// The g x D target matrix of stacked vectorized factors. Each sample's
/// vector is stored contiguously (internally a D x g column-major matrix).
class TargetMatrix {
 public:
  TargetMatrix() = default;
  TargetMatrix(std::size_t samples, std::size_t length) : store_(length, samples) {}

  std::size_t samples() const noexcept { return store_.cols(); }
  std::size_t length() const noexcept { return store_.rows(); }

  double operator()(std::size_t s, std::size_t j) const noexcept { return store_(j, s); }
  std::span<const double> row(std::size_t s) const noexcept { return store_.col(s); }
  std::span<double> row(std::size_t s) noexcept { return store_.col(s); }

  /// Column-major D x g storage: column s is sample s.
  const DenseMatrix& transposed() const noexcept { return store_; }

 private:
  DenseMatrix store_;
};

inline TargetMatrix bulk_gather(std::span<const CholeskyFactor> factors, const VecLayout& layout) {
  for (const auto& f : factors) detail::require_order(f.dim(), layout);
  TargetMatrix t(factors.size(), layout.length());
  parallel_for(factors.size(), [&](std::size_t s) {
    detail::gather_into(factors[s].matrix(), layout, t.row(s).data());
  });
  return t;
}

}  // namespace ridgepath
