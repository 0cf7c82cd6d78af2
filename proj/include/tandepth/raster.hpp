#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace tandepth {

// Row-major dense raster. For float rasters the value 0 marks no-data.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int row, int col) { return data_[static_cast<size_t>(row) * cols_ + col]; }
  const T& operator()(int row, int col) const {
    return data_[static_cast<size_t>(row) * cols_ + col];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const Raster& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool operator==(const Raster& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using DepthMap = Raster<float>;
using DisparityMap = Raster<float>;
using GroundMask = Raster<uint8_t>;

inline bool valid_sample(float v) { return v != 0.0f && std::isfinite(v); }
inline bool valid_sample(double v) { return v != 0.0 && std::isfinite(v); }

}  // namespace tandepth
