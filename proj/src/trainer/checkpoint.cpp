//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/trainer/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tflow/error.h"

namespace tflow {
namespace {

constexpr char kMagic[4] = { 'S', 'F', 'L', 'W' };

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
public:
  void bytes(const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string &s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

private:
  std::vector<std::uint8_t> out_;
};

class Reader {
public:
  explicit Reader(const std::vector<std::uint8_t> &in): in_(in) { }

  void bytes(void *p, std::size_t n, const char *what) {
    if (in_.size() - pos_ < n)
      throw Error(Errc::kIo, std::string("checkpoint truncated at byte offset ")
                                 + std::to_string(pos_) + " while reading "
                                 + what + " (" + std::to_string(n)
                                 + " bytes needed, "
                                 + std::to_string(in_.size() - pos_)
                                 + " available)");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char *what) {
    std::uint32_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::uint64_t u64(const char *what) {
    std::uint64_t v;
    bytes(&v, sizeof v, what);
    return v;
  }
  std::string str(const char *what) {
    const std::uint32_t n = u32(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t pos() const { return pos_; }

private:
  const std::vector<std::uint8_t> &in_;
  std::size_t pos_ = 0;
};

}  // namespace

const TensorRecord *Checkpoint::find(std::string_view name) const {
  for (const TensorRecord &t: tensors) {
    if (t.name == name)
      return &t;
  }
  return nullptr;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint &ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(ckpt.version);
  w.u64(ckpt.digest);
  w.u64(ckpt.epoch);
  w.str(ckpt.config_text);
  w.u64(ckpt.tensors.size());
  for (const TensorRecord &t: ckpt.tensors) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (const std::uint64_t d: t.shape)
      w.u64(d);
    w.bytes(t.data.data(), t.data.size() * sizeof(double));
  }
  return w.take();
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t> &bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw Error(Errc::kFormat, "not a checkpoint (bad magic)");
  Checkpoint c;
  c.version = r.u32("format version");
  if (c.version != kCheckpointVersion)
    throw Error(Errc::kVersion, "checkpoint format version "
                                    + std::to_string(c.version)
                                    + " is not supported (expected "
                                    + std::to_string(kCheckpointVersion) + ")");
  c.digest = r.u64("config digest");
  c.epoch = r.u64("epoch");
  c.config_text = r.str("config text");
  const std::uint64_t count = r.u64("tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    TensorRecord t;
    t.name = r.str("tensor name");
    const std::uint32_t rank = r.u32("tensor rank");
    std::uint64_t elems = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      t.shape.push_back(r.u64("tensor shape"));
      elems *= t.shape.back();
    }
    if (elems > r.remaining() / sizeof(double))
      throw Error(Errc::kIo, "checkpoint truncated at byte offset "
                                 + std::to_string(r.pos()) + " in tensor '"
                                 + t.name + "'");
    t.data.resize(elems);
    r.bytes(t.data.data(), elems * sizeof(double), "tensor data");
    c.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0)
    throw Error(Errc::kFormat, "trailing bytes after the last tensor");
  return c;
}

void write_checkpoint(const Checkpoint &ckpt, const std::filesystem::path &path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(Errc::kIo, "cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(Errc::kIo, "short write to '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(Errc::kIo, "cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

namespace {

std::vector<std::uint64_t> dims(const std::vector<std::size_t> &shape) {
  return { shape.begin(), shape.end() };
}

}  // namespace

Checkpoint make_checkpoint(const Model &model, const Adam *adam,
                           std::uint64_t epoch) {
  Checkpoint c;
  c.digest = model.config().digest();
  c.epoch = epoch;
  c.config_text = model.config().text();
  const auto theta = model.theta();
  for (const auto &e: model.params().entries()) {
    const auto v = e.ref.of(theta);
    c.tensors.push_back({ e.name, dims(e.shape), { v.begin(), v.end() } });
  }
  if (adam != nullptr) {
    for (const char *which: { "m", "v" }) {
      const auto &buf = which[0] == 'm' ? adam->m() : adam->v();
      for (const auto &e: model.params().entries()) {
        if (!e.trainable)
          continue;
        const auto begin = buf.begin() + static_cast<std::ptrdiff_t>(e.ref.offset);
        c.tensors.push_back({ std::string("adam.") + which + "/" + e.name,
                              dims(e.shape),
                              { begin, begin + static_cast<std::ptrdiff_t>(e.ref.size) } });
      }
    }
    c.tensors.push_back(
        { "adam.steps", { 1 }, { static_cast<double>(adam->steps()) } });
  }
  return c;
}

namespace {

const TensorRecord &require(const Checkpoint &c, const std::string &name,
                            const std::vector<std::size_t> &shape) {
  const TensorRecord *t = c.find(name);
  if (t == nullptr)
    throw Error(Errc::kVersion, "checkpoint lacks tensor '" + name + "'");
  if (t->shape != dims(shape))
    throw Error(Errc::kVersion, "tensor '" + name + "' has a different shape");
  return *t;
}

}  // namespace

void restore_checkpoint(const Checkpoint &ckpt, Model &model, Adam *adam) {
  if (ckpt.digest != model.config().digest())
    throw Error(Errc::kVersion,
                "checkpoint was written for a different model configuration");
  auto theta = model.theta();
  for (const auto &e: model.params().entries()) {
    const TensorRecord &t = require(ckpt, e.name, e.shape);
    std::copy(t.data.begin(), t.data.end(), e.ref.of(theta).begin());
  }
  if (adam == nullptr)
    return;
  *adam = Adam(model.params().size());
  const TensorRecord *steps = ckpt.find("adam.steps");
  if (steps == nullptr)
    return;  // parameters-only checkpoint: fresh optimizer state
  adam->set_steps(static_cast<std::uint64_t>(steps->data.at(0)));
  for (const auto &e: model.params().entries()) {
    if (!e.trainable)
      continue;
    const auto &m = require(ckpt, "adam.m/" + e.name, e.shape).data;
    const auto &v = require(ckpt, "adam.v/" + e.name, e.shape).data;
    std::copy(m.begin(), m.end(), adam->m().begin() + e.ref.offset);
    std::copy(v.begin(), v.end(), adam->v().begin() + e.ref.offset);
  }
}

Model model_from_checkpoint(const Checkpoint &ckpt) {
  Model model(ModelConfig::from_config(Config::parse(ckpt.config_text)));
  restore_checkpoint(ckpt, model, nullptr);
  return model;
}

}  // namespace tflow
