#include "simi/tensor.hpp"

#include <algorithm>
#include <cstdint>

namespace simi {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) {
    throw Error(Errc::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                         " does not match shape " + shape_.str());
  }
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) {
    throw Error(Errc::ShapeMismatch, "item() on non-scalar tensor " + shape_.str());
  }
  return data_[0];
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
Tensor<T>& Tensor<T>::operator+=(const Tensor& other) {
  require_same_shape(shape_, other.shape_, "tensor +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": " + a.str() + " vs " + b.str());
  }
}

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptData: return "CorruptData";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ChannelCountMismatch: return "ChannelCountMismatch";
    case Errc::NonBinaryValue: return "NonBinaryValue";
    case Errc::InvalidLevelCount: return "InvalidLevelCount";
    case Errc::NonPositiveStride: return "NonPositiveStride";
    case Errc::DivisionRangeViolation: return "DivisionRangeViolation";
    case Errc::NonScalarLoss: return "NonScalarLoss";
    case Errc::MissingGradient: return "MissingGradient";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::ConfigDigestMismatch: return "ConfigDigestMismatch";
    case Errc::CorruptCheckpoint: return "CorruptCheckpoint";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

template class Tensor<float>;
template class Tensor<double>;
template class Tensor<std::uint8_t>;

}  // namespace simi
