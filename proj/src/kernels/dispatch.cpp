//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <atomic>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "tables.h"
#include "tflow/kernels.h"

namespace tflow::kernels {
namespace internal {

bool host_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace internal

namespace {

const KernelTable *find_table(std::string_view name) {
  for (const KernelTable *t: available_tables()) {
    if (t->name == name)
      return t;
  }
  return nullptr;
}

const KernelTable *best_table() {
  if (const char *env = std::getenv("TFLOW_KERNELS"); env != nullptr) {
    if (const KernelTable *t = find_table(env); t != nullptr)
      return t;
  }
  return available_tables().back();
}

std::atomic<const KernelTable *> &current() {
  static std::atomic<const KernelTable *> table { best_table() };
  return table;
}

}  // namespace

std::vector<const KernelTable *> available_tables() {
  std::vector<const KernelTable *> tables { &scalar_table() };
  if (const KernelTable *t = internal::neon_table(); t != nullptr)
    tables.push_back(t);
  if (const KernelTable *t = internal::avx2_table();
      t != nullptr && internal::host_has_avx2_fma())
    tables.push_back(t);
  return tables;
}

const KernelTable &active() {
  return *current().load(std::memory_order_relaxed);
}

bool select(std::string_view name) {
  const KernelTable *t = find_table(name);
  if (t == nullptr)
    return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace tflow::kernels
