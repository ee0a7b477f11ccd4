//
// drp - drug response prediction toolkit
// SPDX-License-Identifier: Apache-2.0
//

#include "drp/autodiff/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "drp/common/error.h"

namespace drp::ad {
namespace {

constexpr char kMagic[8] = {'D', 'R', 'P', 'C', 'K', 'P', 'T', '\0'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename U>
void AppendLe(std::vector<std::uint8_t> &out, U value) {
  std::uint8_t raw[sizeof(U)];
  std::memcpy(raw, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = sizeof(U); i-- > 0;) out.push_back(raw[i]);
  } else {
    out.insert(out.end(), raw, raw + sizeof(U));
  }
}

template <typename U>
U ReadLe(const std::uint8_t *p) {
  std::uint8_t raw[sizeof(U)];
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(U); ++i) raw[i] = p[sizeof(U) - 1 - i];
  } else {
    std::memcpy(raw, p, sizeof(U));
  }
  U v;
  std::memcpy(&v, raw, sizeof(U));
  return v;
}

std::size_t ElementSize(DType t) {
  switch (t) {
    case DType::kFloat32: return 4;
    case DType::kFloat64: return 8;
    case DType::kInt64: return 8;
    case DType::kUInt8: return 1;
  }
  throw DataError("checkpoint: unknown dtype");
}

std::uint64_t ElementCount(const std::vector<std::uint64_t> &extents) {
  std::uint64_t n = 1;
  for (auto e : extents) n *= e;
  return n;
}

class Reader {
 public:
  explicit Reader(const std::string &bytes)
      : data_(reinterpret_cast<const std::uint8_t *>(bytes.data())),
        size_(bytes.size()) {}

  const std::uint8_t *Take(std::size_t n) {
    if (size_ - pos_ < n) throw DataError("checkpoint: truncated file");
    const std::uint8_t *p = data_ + pos_;
    pos_ += n;
    return p;
  }

  template <typename U>
  U Read() {
    return ReadLe<U>(Take(sizeof(U)));
  }

  bool done() const { return pos_ == size_; }

 private:
  const std::uint8_t *data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename T>
void Checkpoint::PutMatrix(const std::string &name, const Matrix<T> &m) {
  ArrayEntry e;
  e.dtype = std::is_same_v<T, float> ? DType::kFloat32 : DType::kFloat64;
  e.extents = {static_cast<std::uint64_t>(m.rows()),
               static_cast<std::uint64_t>(m.cols())};
  e.bytes.reserve(m.size() * sizeof(T));
  for (Eigen::Index i = 0; i < m.size(); ++i) AppendLe<T>(e.bytes, m.data()[i]);
  entries_[name] = std::move(e);
}

void Checkpoint::PutVector(const std::string &name, const std::vector<double> &v) {
  ArrayEntry e;
  e.dtype = DType::kFloat64;
  e.extents = {static_cast<std::uint64_t>(v.size())};
  for (double x : v) AppendLe<double>(e.bytes, x);
  entries_[name] = std::move(e);
}

void Checkpoint::PutInts(const std::string &name, const std::vector<std::int64_t> &v) {
  ArrayEntry e;
  e.dtype = DType::kInt64;
  e.extents = {static_cast<std::uint64_t>(v.size())};
  for (auto x : v) AppendLe<std::int64_t>(e.bytes, x);
  entries_[name] = std::move(e);
}

void Checkpoint::PutText(const std::string &name, const std::string &text) {
  ArrayEntry e;
  e.dtype = DType::kUInt8;
  e.extents = {static_cast<std::uint64_t>(text.size())};
  e.bytes.assign(text.begin(), text.end());
  entries_[name] = std::move(e);
}

const ArrayEntry &Checkpoint::Get(const std::string &name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw DataError("checkpoint: missing entry " + name);
  return it->second;
}

template <typename T>
Matrix<T> Checkpoint::GetMatrix(const std::string &name) const {
  const ArrayEntry &e = Get(name);
  if (e.extents.empty() || e.extents.size() > 2) {
    throw DataError("checkpoint: entry " + name + " is not rank 1 or 2");
  }
  const auto rows = e.extents.size() == 2 ? e.extents[0] : 1;
  const auto cols = e.extents.back();
  Matrix<T> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const std::uint8_t *p = e.bytes.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (e.dtype == DType::kFloat32) {
      m.data()[i] = static_cast<T>(ReadLe<float>(p + 4 * i));
    } else if (e.dtype == DType::kFloat64) {
      m.data()[i] = static_cast<T>(ReadLe<double>(p + 8 * i));
    } else {
      throw DataError("checkpoint: entry " + name + " is not floating point");
    }
  }
  return m;
}

std::vector<double> Checkpoint::GetVector(const std::string &name) const {
  Matrix<double> m = GetMatrix<double>(name);
  return std::vector<double>(m.data(), m.data() + m.size());
}

std::vector<std::int64_t> Checkpoint::GetInts(const std::string &name) const {
  const ArrayEntry &e = Get(name);
  if (e.dtype != DType::kInt64) throw DataError("checkpoint: entry " + name + " is not i64");
  std::vector<std::int64_t> v(ElementCount(e.extents));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ReadLe<std::int64_t>(e.bytes.data() + 8 * i);
  return v;
}

std::string Checkpoint::GetText(const std::string &name) const {
  const ArrayEntry &e = Get(name);
  if (e.dtype != DType::kUInt8) throw DataError("checkpoint: entry " + name + " is not text");
  return std::string(e.bytes.begin(), e.bytes.end());
}

std::vector<std::string> Checkpoint::Names() const {
  std::vector<std::string> names;
  for (const auto &[k, v] : entries_) names.push_back(k);
  return names;
}

std::string Checkpoint::Serialize() const {
  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof(kMagic));
  AppendLe<std::uint32_t>(out, kCheckpointVersion);
  AppendLe<std::uint32_t>(out, static_cast<std::uint32_t>(entries_.size()));
  for (const auto &[name, e] : entries_) {
    AppendLe<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<std::uint8_t>(e.dtype));
    out.push_back(static_cast<std::uint8_t>(e.extents.size()));
    for (auto x : e.extents) AppendLe<std::uint64_t>(out, x);
    out.insert(out.end(), e.bytes.begin(), e.bytes.end());
  }
  return std::string(out.begin(), out.end());
}

Checkpoint Checkpoint::Deserialize(const std::string &bytes) {
  Reader r(bytes);
  if (std::memcmp(r.Take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
    throw DataError("checkpoint: bad magic");
  }
  const auto version = r.Read<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = r.Read<std::uint32_t>();
  Checkpoint c;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.Read<std::uint32_t>();
    const auto *np = r.Take(name_len);
    std::string name(reinterpret_cast<const char *>(np), name_len);
    ArrayEntry e;
    const auto dtype = r.Read<std::uint8_t>();
    if (dtype < 1 || dtype > 4) throw DataError("checkpoint: unknown dtype in " + name);
    e.dtype = static_cast<DType>(dtype);
    const auto rank = r.Read<std::uint8_t>();
    for (int k = 0; k < rank; ++k) e.extents.push_back(r.Read<std::uint64_t>());
    const std::uint64_t nbytes = ElementCount(e.extents) * ElementSize(e.dtype);
    const auto *vp = r.Take(static_cast<std::size_t>(nbytes));
    e.bytes.assign(vp, vp + nbytes);
    c.entries_[name] = std::move(e);
  }
  if (!r.done()) throw DataError("checkpoint: trailing bytes");
  return c;
}

void Checkpoint::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = Serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint Checkpoint::Load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Deserialize(bytes);
}

template void Checkpoint::PutMatrix<float>(const std::string &, const Matrix<float> &);
template void Checkpoint::PutMatrix<double>(const std::string &, const Matrix<double> &);
template Matrix<float> Checkpoint::GetMatrix<float>(const std::string &) const;
template Matrix<double> Checkpoint::GetMatrix<double>(const std::string &) const;

}  // namespace drp::ad
