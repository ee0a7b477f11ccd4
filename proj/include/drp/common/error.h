//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_COMMON_ERROR_H_
#define DRP_COMMON_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or width mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Value outside the domain an operation accepts (e.g. targets outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or inconsistent dataset.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string &what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class VocabularyError : public Error {
 public:
  explicit VocabularyError(std::string label)
      : Error("cluster label not in vocabulary: " + label),
        label_(std::move(label)) {}

  const std::string &label() const noexcept { return label_; }

 private:
  std::string label_;
};

// Non-finite loss or gradient during optimization. epoch is -1 when the
// failure happened outside an epoch loop.
class TrainingDiverged : public Error {
 public:
  explicit TrainingDiverged(const std::string &what, int epoch = -1)
      : Error(epoch >= 0 ? what + " (epoch " + std::to_string(epoch) + ")"
                         : what),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace drp

#endif  // DRP_COMMON_ERROR_H_
