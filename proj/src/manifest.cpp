#include "pap/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace pap {

const char* label_name(Label l) {
    return l == Label::papilledema ? "papilledema" : "pseudopapilledema";
}

Label label_from_name(const std::string& name) {
    if (name == "papilledema") return Label::papilledema;
    if (name == "pseudopapilledema") return Label::pseudopapilledema;
    throw Error("unknown label: \"" + name + "\"");
}

std::vector<std::string> DatasetManifest::subjects() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& r : records)
        if (seen.insert(r.subject_id).second) out.push_back(r.subject_id);
    return out;
}

Label DatasetManifest::subject_label(const std::string& subject_id) const {
    int pos = 0, neg = 0;
    Label first = Label::pseudopapilledema;
    bool found = false;
    for (const auto& r : records) {
        if (r.subject_id != subject_id) continue;
        if (!found) {
            first = r.label;
            found = true;
        }
        (r.label == Label::papilledema ? pos : neg)++;
    }
    if (!found) throw Error("unknown subject id: " + subject_id);
    if (pos == neg) return first;
    return pos > neg ? Label::papilledema : Label::pseudopapilledema;
}

DatasetManifest DatasetManifest::filter_subjects(const std::vector<std::string>& keep) const {
    std::set<std::string> keep_set(keep.begin(), keep.end());
    DatasetManifest out;
    for (const auto& r : records)
        if (keep_set.count(r.subject_id)) out.records.push_back(r);
    return out;
}

DatasetManifest parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest: " + path);

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("malformed manifest JSON (" + path + "): " + e.what());
    }

    if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array())
        throw Error("manifest must be an object with a \"records\" array: " + path);

    const fs::path base = fs::path(path).parent_path();
    DatasetManifest m;
    for (const auto& rec : doc["records"]) {
        if (!rec.is_object()) throw Error("manifest record must be an object: " + path);
        for (const auto& [key, _] : rec.items())
            if (key != "image" && key != "subject" && key != "label")
                throw Error("unknown manifest record key \"" + key + "\" in " + path);
        if (!rec.contains("image") || !rec.contains("subject") || !rec.contains("label"))
            throw Error("manifest record needs image, subject and label fields: " + path);

        ManifestRecord r;
        fs::path img = rec["image"].get<std::string>();
        r.image_path = (img.is_absolute() ? img : base / img).lexically_normal().string();
        r.subject_id = rec["subject"].get<std::string>();
        if (r.subject_id.empty()) throw Error("empty subject id in manifest: " + path);
        r.label = label_from_name(rec["label"].get<std::string>());
        m.records.push_back(std::move(r));
    }
    if (m.records.empty()) throw Error("manifest has no records: " + path);
    return m;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    const fs::path base = fs::path(path).parent_path();
    json records = json::array();
    for (const auto& r : m.records) {
        fs::path img = r.image_path;
        std::error_code ec;
        fs::path rel = fs::relative(img, base.empty() ? "." : base, ec);
        json rec;
        rec["image"] = (ec || rel.empty()) ? img.string() : rel.string();
        rec["subject"] = r.subject_id;
        rec["label"] = label_name(r.label);
        records.push_back(rec);
    }
    json doc;
    doc["records"] = records;

    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest: " + path);
    out << doc.dump(2) << "\n";
}

}  // namespace pap
