//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_FLOW_PARAMS_H_
#define TFLOW_FLOW_PARAMS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tflow {

// Location of one named tensor inside the flat parameter vector.
struct ParamRef {
  std::size_t offset = 0;
  std::size_t size = 0;

  std::span<double> of(std::span<double> flat) const {
    return flat.subspan(offset, size);
  }
  std::span<const double> of(std::span<const double> flat) const {
    return flat.subspan(offset, size);
  }
};

// Every model parameter lives in one contiguous vector so that gradients,
// optimizer moments and checkpoints are flat buffers of the same length.
// Layers hold ParamRefs and read their values from a span of this vector,
// which keeps forward and backward passes free of mutable state.
class ParamStore {
public:
  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
    ParamRef ref;
    bool trainable = true;
  };

  ParamRef add(std::string name, std::vector<std::size_t> shape,
               bool trainable = true);

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> values(ParamRef r) { return r.of(values()); }
  std::span<const double> values(ParamRef r) const { return r.of(values()); }

  std::size_t size() const { return data_.size(); }
  const std::vector<Entry> &entries() const { return entries_; }
  const Entry *find(std::string_view name) const;

  // Entry owning flat index i.
  const Entry &entry_at(std::size_t i) const;

private:
  std::vector<Entry> entries_;
  std::vector<double> data_;
};

}  // namespace tflow

#endif  // TFLOW_FLOW_PARAMS_H_
