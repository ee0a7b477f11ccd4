//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DRP_AUTODIFF_CHECKPOINT_H_
#define DRP_AUTODIFF_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "drp/autodiff/tensor.h"

namespace drp::ad {

// Named-array container shared by every trainable module.
//
// Layout (all integers little-endian):
//   magic    8 bytes  "DRPCKPT\0"
//   version  u32      kCheckpointVersion
//   count    u32      number of entries
//   entries, in ascending name order:
//     name_len u32, name bytes (UTF-8)
//     dtype    u8   (1 = f32, 2 = f64, 3 = i64, 4 = u8)
//     rank     u8
//     extents  u64 x rank
//     values   product(extents) elements, little-endian
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kFloat32 = 1, kFloat64 = 2, kInt64 = 3, kUInt8 = 4 };

struct ArrayEntry {
  DType dtype = DType::kFloat64;
  std::vector<std::uint64_t> extents;
  std::vector<std::uint8_t> bytes;  // little-endian payload
};

class Checkpoint {
 public:
  template <typename T>
  void PutMatrix(const std::string &name, const Matrix<T> &m);
  void PutVector(const std::string &name, const std::vector<double> &v);
  void PutInts(const std::string &name, const std::vector<std::int64_t> &v);
  void PutText(const std::string &name, const std::string &text);

  bool Has(const std::string &name) const { return entries_.count(name) > 0; }
  const ArrayEntry &Get(const std::string &name) const;

  // Converts from the stored floating dtype. Rank-1 arrays load as 1 x n.
  template <typename T>
  Matrix<T> GetMatrix(const std::string &name) const;
  std::vector<double> GetVector(const std::string &name) const;
  std::vector<std::int64_t> GetInts(const std::string &name) const;
  std::string GetText(const std::string &name) const;

  std::vector<std::string> Names() const;

  std::string Serialize() const;
  static Checkpoint Deserialize(const std::string &bytes);

  void Save(const std::filesystem::path &path) const;
  static Checkpoint Load(const std::filesystem::path &path);

 private:
  std::map<std::string, ArrayEntry> entries_;
};

}  // namespace drp::ad

#endif  // DRP_AUTODIFF_CHECKPOINT_H_
