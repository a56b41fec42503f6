// Copyright 2026 The aerotrack Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aerotrack {

/// N rows of D float32 values; row i belongs to detection record i of the
/// companion detection file.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<float> data;

  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data).subspan(i * dim, dim);
  }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

}  // namespace aerotrack
