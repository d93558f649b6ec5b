//
// targetflow - Copyright 2026 The targetflow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef TFLOW_SRC_KERNELS_TABLES_H_
#define TFLOW_SRC_KERNELS_TABLES_H_

#include "tflow/kernels.h"

namespace tflow::kernels::internal {

// Each returns nullptr when the variant was not compiled for this target.
const KernelTable *avx2_table();
const KernelTable *neon_table();

bool host_has_avx2_fma();

}  // namespace tflow::kernels::internal

#endif  // TFLOW_SRC_KERNELS_TABLES_H_
