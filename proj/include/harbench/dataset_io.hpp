#pragma once

#include <filesystem>

#include "harbench/data_model.hpp"

namespace harbench {

enum class DatasetFormat { auto_detect, canonical, continuous };

/// Reads a dataset directory. The canonical layout is `dataset.json` plus one
/// `trials/<trial_id>.csv` per trial (header row = channel names). The
/// continuous variant lists `recordings` instead of `trials`, stores files
/// under `recordings/` with a trailing `label` column, and is routed through
/// standardize().
Dataset ingest_dataset(const std::filesystem::path& dir,
                       DatasetFormat format = DatasetFormat::auto_detect);

/// Writes the canonical layout. emit followed by ingest reproduces the
/// dataset exactly (doubles are serialized round-trip safe).
void emit_dataset(const Dataset& ds, const std::filesystem::path& dir);

}  // namespace harbench
