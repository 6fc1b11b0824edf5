#pragma once

#include <filesystem>

#include "amlgraph/model.hpp"

namespace aml {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian binary checkpoint; layout documented in docs/checkpoint_format.md.
void save_checkpoint(const GcnModel& m, const std::filesystem::path& path);

/// Throws Error on bad magic, version mismatch, or truncation.
GcnModel load_checkpoint(const std::filesystem::path& path);

/// Throws Error("dimension mismatch ...") when `m` cannot consume embeddings of width `embed_dim`.
void require_embedding_dim(const GcnModel& m, std::size_t embed_dim);

}  // namespace aml
