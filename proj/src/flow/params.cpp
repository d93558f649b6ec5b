//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "tflow/flow/params.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <utility>

#include "tflow/error.h"

namespace tflow {

ParamRef ParamStore::add(std::string name, std::vector<std::size_t> shape,
                         bool trainable) {
  if (find(name) != nullptr)
    throw Error(Errc::kShape, "duplicate parameter '" + name + "'");
  const std::size_t count = std::accumulate(
      shape.begin(), shape.end(), std::size_t { 1 }, std::multiplies<>());
  ParamRef ref { data_.size(), count };
  data_.resize(data_.size() + count, 0.0);
  entries_.push_back({ std::move(name), std::move(shape), ref, trainable });
  return ref;
}

const ParamStore::Entry *ParamStore::find(std::string_view name) const {
  for (const Entry &e: entries_) {
    if (e.name == name)
      return &e;
  }
  return nullptr;
}

const ParamStore::Entry &ParamStore::entry_at(std::size_t i) const {
  auto it = std::upper_bound(
      entries_.begin(), entries_.end(), i,
      [](std::size_t x, const Entry &e) { return x < e.ref.offset; });
  if (it == entries_.begin() || i >= data_.size())
    throw Error(Errc::kRange, "parameter index out of range");
  return *std::prev(it);
}

}  // namespace tflow
