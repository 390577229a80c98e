#pragma once

#include <string>
#include <vector>

#include "mgap/embedding.hpp"
#include "mgap/gaploss.hpp"
#include "mgap/mlp.hpp"
#include "mgap/spheresim.hpp"

namespace mgap {

enum class FileFormat { csv, jsonl, bin };

// Format by extension (.csv / .jsonl / .bin); anything else is sniffed
// from the leading bytes.
FileFormat detect_format(const std::string& path);

// CSV: header "id,modality,v0,...,v{d-1}". JSONL: one object per line
// with "id", "modality", "v". BIN: "MGAP" magic, u32 version 1, u32
// count, u32 dim, u32 modality length, modality bytes, then row-major
// f32 little-endian values (computation stays f64; BIN ingestion
// upcasts).
EmbeddingSet read_embeddings(const std::string& path);
void write_embeddings(const EmbeddingSet& set, const std::string& path, FileFormat format);
void write_embeddings(const EmbeddingSet& set, const std::string& path);  // by extension

// Analysis-ready CSV emitters (17 significant digits).
void write_landscape_csv(const LandscapeCurve& curve, const std::string& path,
                         const std::string& control_column = "lambda");
void write_layer_curve_csv(const LayerCurve& curve, const std::string& path);
void write_train_trace_csv(const TrainTrace& trace, const std::string& path);
void write_matrix_csv(const Mat& m, const std::string& path);

std::string format_full(double v);  // shortest 17-significant-digit decimal

}  // namespace mgap
