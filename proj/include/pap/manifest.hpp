#pragma once

#include <string>
#include <vector>

#include "pap/types.hpp"

namespace pap {

/// One dataset entry. `image_path` is resolved against the manifest file's
/// directory at parse time, so records are usable from any working directory.
struct ManifestRecord {
    std::string image_path;
    std::string subject_id;
    Label label = Label::pseudopapilledema;
};

struct DatasetManifest {
    std::vector<ManifestRecord> records;

    size_t size() const { return records.size(); }

    /// Distinct subject ids in first-appearance order.
    std::vector<std::string> subjects() const;

    /// Majority label of a subject's records (first record wins ties).
    Label subject_label(const std::string& subject_id) const;

    /// Records restricted to a set of subjects, preserving order.
    DatasetManifest filter_subjects(const std::vector<std::string>& keep) const;
};

/// Parses the JSON manifest format:
///   {"records":[{"image": "...", "subject": "...",
///                "label": "papilledema"|"pseudopapilledema"}, ...]}
/// Relative image paths are interpreted relative to the manifest's directory.
DatasetManifest parse_manifest(const std::string& path);

/// Writes the manifest with image paths relative to the output directory
/// when possible, absolute otherwise.
void write_manifest(const DatasetManifest& m, const std::string& path);

const char* label_name(Label l);
Label label_from_name(const std::string& name);

}  // namespace pap
