#include "ersatz/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ersatz {

namespace {

constexpr const char* kManifestFormat = "ersatz-manifest";
constexpr int kManifestVersion = 1;
constexpr const char* kMachineHeaderPrefix = "# ersatz-machine-properties";
constexpr int kMachineVersion = 1;

using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

double require_finite(const json& j, const std::string& what) {
    if (!j.is_number()) throw SchemaError(what + " must be a number");
    const double v = j.get<double>();
    if (!is_finite(v)) throw DomainError(what + " must be finite");
    return v;
}

}  // namespace

bool Manifest::has_class(const std::string& label) const {
    return std::any_of(classes.begin(), classes.end(),
                       [&](const ClassInfo& c) { return c.label == label; });
}

int Manifest::total_instances() const {
    int total = 0;
    for (const auto& c : classes) total += c.instance_count;
    return total;
}

Manifest parse_manifest(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest parse error: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("manifest must be a JSON object");
    if (doc.value("format", "") != kManifestFormat) {
        throw SchemaError("manifest missing format field '" +
                          std::string(kManifestFormat) + "'");
    }
    if (!doc.contains("schema_version") ||
        !doc["schema_version"].is_number_integer()) {
        throw SchemaError("manifest missing integer schema_version");
    }
    Manifest m;
    m.schema_version = doc["schema_version"].get<int>();
    if (m.schema_version != kManifestVersion) {
        throw VersionMismatchError(
            "unsupported manifest schema_version " +
            std::to_string(m.schema_version) + ", expected " +
            std::to_string(kManifestVersion));
    }
    m.name = doc.value("name", "");
    if (!doc.contains("machine_property_dim") ||
        !doc["machine_property_dim"].is_number_integer()) {
        throw SchemaError("manifest missing integer machine_property_dim");
    }
    m.machine_property_dim = doc["machine_property_dim"].get<int>();

    if (doc.contains("functional_properties")) {
        for (const auto& f : doc["functional_properties"]) {
            if (!f.is_string()) {
                throw SchemaError("functional_properties must be strings");
            }
            m.functional_properties.push_back(f.get<std::string>());
        }
    } else {
        m.functional_properties = default_functional_properties();
    }

    if (!doc.contains("classes") || !doc["classes"].is_array()) {
        throw SchemaError("manifest missing classes array");
    }
    for (const auto& c : doc["classes"]) {
        if (!c.is_object() || !c.contains("label") ||
            !c.contains("instances")) {
            throw SchemaError("each class needs label and instances");
        }
        ClassInfo info;
        info.label = c["label"].get<std::string>();
        if (!c["instances"].is_number_integer()) {
            throw SchemaError("class instances must be an integer");
        }
        info.instance_count = c["instances"].get<int>();
        m.classes.push_back(std::move(info));
    }

    if (!doc.contains("human_properties") ||
        !doc["human_properties"].is_array()) {
        throw SchemaError("manifest missing human_properties array");
    }
    for (const auto& p : doc["human_properties"]) {
        if (!p.is_object() || !p.contains("label") || !p.contains("kind") ||
            !p.contains("distributions")) {
            throw SchemaError(
                "each human property needs label, kind and distributions");
        }
        HumanPropertySpec spec;
        spec.property.label = p["label"].get<std::string>();
        spec.property.source = PropertySource::HumanGenerated;
        const std::string kind = p["kind"].get<std::string>();
        if (kind == "physical") {
            spec.property.kind = PropertyKind::Physical;
        } else if (kind == "functional") {
            spec.property.kind = PropertyKind::Functional;
        } else {
            throw SchemaError("property kind must be physical or functional, "
                              "got '" + kind + "'");
        }
        if (!p["distributions"].is_object()) {
            throw SchemaError("distributions must map class labels");
        }
        for (const auto& [cls, d] : p["distributions"].items()) {
            if (d.is_null()) {
                spec.per_class[cls] = std::nullopt;
                continue;
            }
            if (!d.is_object()) {
                throw SchemaError("distribution for '" + cls +
                                  "' must be an object or null");
            }
            DistributionSpec ds;
            ds.mean = require_finite(d.at("mean"), "mean");
            ds.stddev = require_finite(d.at("stddev"), "stddev");
            ds.min = require_finite(d.at("min"), "min");
            ds.max = require_finite(d.at("max"), "max");
            spec.per_class[cls] = ds;
        }
        m.human_properties.push_back(std::move(spec));
    }

    validate_manifest(m);
    return m;
}

Manifest load_manifest(const std::string& path) {
    return parse_manifest(read_text_file(path));
}

void validate_manifest(const Manifest& m) {
    if (m.machine_property_dim < 0) {
        throw DomainError("machine_property_dim must be >= 0");
    }
    if (m.classes.empty()) throw SchemaError("manifest has no classes");
    std::set<std::string> seen;
    for (const auto& c : m.classes) {
        if (c.label.empty()) throw SchemaError("empty class label");
        if (!seen.insert(c.label).second) {
            throw SchemaError("duplicate class label '" + c.label + "'");
        }
        if (c.instance_count <= 0) {
            throw DomainError("class '" + c.label +
                              "' must have instance_count > 0");
        }
    }
    const std::set<std::string> allowed(m.functional_properties.begin(),
                                        m.functional_properties.end());
    std::set<std::string> props;
    for (const auto& spec : m.human_properties) {
        if (spec.property.label.empty()) throw SchemaError("empty property label");
        if (!props.insert(spec.property.label).second) {
            throw SchemaError("duplicate property label '" +
                              spec.property.label + "'");
        }
        if (spec.property.kind == PropertyKind::Functional &&
            allowed.count(spec.property.label) == 0) {
            throw SchemaError("functional property '" + spec.property.label +
                              "' is not in the configured functional set");
        }
        for (const auto& c : m.classes) {
            auto it = spec.per_class.find(c.label);
            if (it == spec.per_class.end()) {
                throw SchemaError("property '" + spec.property.label +
                                  "' has no distribution or unmeasured marker "
                                  "for class '" + c.label + "'");
            }
            if (!it->second.has_value()) continue;
            const DistributionSpec& d = *it->second;
            if (d.stddev < 0.0) {
                throw DomainError("stddev < 0 for property '" +
                                  spec.property.label + "', class '" +
                                  c.label + "'");
            }
            if (!(d.min < d.max)) {
                throw DomainError("min must be < max for property '" +
                                  spec.property.label + "', class '" +
                                  c.label + "'");
            }
            if (d.stddev == 0.0 && (d.mean < d.min || d.mean > d.max)) {
                throw DomainError(
                    "stddev 0 with mean outside [min,max] for property '" +
                    spec.property.label + "', class '" + c.label + "'");
            }
        }
        for (const auto& [cls, unused] : spec.per_class) {
            if (!m.has_class(cls)) {
                throw SchemaError("property '" + spec.property.label +
                                  "' references unknown class '" + cls + "'");
            }
        }
    }
}

std::string manifest_to_text(const Manifest& m) {
    json doc;
    doc["format"] = kManifestFormat;
    doc["schema_version"] = m.schema_version;
    if (!m.name.empty()) doc["name"] = m.name;
    doc["machine_property_dim"] = m.machine_property_dim;
    doc["functional_properties"] = m.functional_properties;
    json classes = json::array();
    for (const auto& c : m.classes) {
        classes.push_back({{"label", c.label}, {"instances", c.instance_count}});
    }
    doc["classes"] = classes;
    json props = json::array();
    for (const auto& spec : m.human_properties) {
        json p;
        p["label"] = spec.property.label;
        p["kind"] = spec.property.kind == PropertyKind::Physical
                        ? "physical"
                        : "functional";
        json dists = json::object();
        for (const auto& [cls, d] : spec.per_class) {
            if (!d.has_value()) {
                dists[cls] = nullptr;
            } else {
                dists[cls] = {{"mean", d->mean},
                              {"stddev", d->stddev},
                              {"min", d->min},
                              {"max", d->max}};
            }
        }
        p["distributions"] = dists;
        props.push_back(p);
    }
    doc["human_properties"] = props;
    return doc.dump(2) + "\n";
}

void save_manifest(const Manifest& m, const std::string& path) {
    validate_manifest(m);
    write_text_file(path, manifest_to_text(m));
}

MachinePropertyFile parse_machine_file(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("machine property file is missing its header line");
    }
    std::istringstream header(line);
    std::string hash, name, version, dim_field;
    header >> hash >> name >> version >> dim_field;
    if (hash != "#" || (std::string("# ") + name).rfind(kMachineHeaderPrefix,
                                                        0) != 0) {
        throw ParseError("machine property file header not recognized");
    }
    if (version != "v" + std::to_string(kMachineVersion)) {
        throw VersionMismatchError("unsupported machine property file version '" +
                                   version + "'");
    }
    if (dim_field.rfind("dim=", 0) != 0) {
        throw ParseError("machine property header missing dim= field");
    }
    MachinePropertyFile file;
    try {
        file.dim = std::stoi(dim_field.substr(4));
    } catch (const std::exception&) {
        throw ParseError("machine property header has malformed dim");
    }
    if (file.dim < 0) throw DomainError("machine property dim must be >= 0");

    std::set<std::string> seen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string id;
        if (!std::getline(row, id, '\t')) {
            throw ParseError("malformed machine property row: " + line);
        }
        std::vector<double> vec;
        std::string cell;
        while (std::getline(row, cell, '\t')) {
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
                vec.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("malformed number '" + cell +
                                 "' in machine property row for '" + id + "'");
            }
        }
        if (static_cast<int>(vec.size()) != file.dim) {
            throw SchemaError("row for '" + id + "' has " +
                              std::to_string(vec.size()) +
                              " values, header says dim=" +
                              std::to_string(file.dim));
        }
        for (double v : vec) {
            if (!is_finite(v)) {
                throw DomainError("non-finite machine property value for '" +
                                  id + "'");
            }
        }
        if (!seen.insert(id).second) {
            throw SchemaError("duplicate machine property row for '" + id +
                              "'");
        }
        file.rows.emplace_back(std::move(id), std::move(vec));
    }
    return file;
}

MachinePropertyFile load_machine_file(const std::string& path) {
    return parse_machine_file(read_text_file(path));
}

std::string machine_file_to_text(const MachinePropertyFile& file) {
    std::ostringstream out;
    out << kMachineHeaderPrefix << " v" << kMachineVersion << " dim="
        << file.dim << "\n";
    for (const auto& [id, vec] : file.rows) {
        out << id;
        for (double v : vec) {
            out << '\t' << nlohmann::json(v).dump();
        }
        out << "\n";
    }
    return out.str();
}

void save_machine_file(const MachinePropertyFile& file,
                       const std::string& path) {
    write_text_file(path, machine_file_to_text(file));
}

std::uint64_t draw_stream_seed(std::uint64_t seed,
                               const std::string& class_label,
                               const std::string& property_label,
                               int instance_index) {
    std::uint64_t h = fnv1a64(seed, kFnvOffset);
    h = fnv1a64(class_label, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(property_label, h);
    h = fnv1a64("\x1f", h);
    h = fnv1a64(static_cast<std::uint64_t>(instance_index), h);
    return h;
}

namespace {

// Uniform draws built directly from engine bits so the stream is identical
// across standard library implementations.
double uniform_open01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double sample_truncated_normal(const DistributionSpec& spec,
                               std::uint64_t stream_seed) {
    if (spec.stddev == 0.0) return spec.mean;
    std::mt19937_64 rng(stream_seed);
    constexpr int kMaxRejections = 100000;
    for (int i = 0; i < kMaxRejections; ++i) {
        const double u1 = uniform_open01(rng);
        const double u2 = uniform_open01(rng);
        const double z =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        const double v = spec.mean + spec.stddev * z;
        if (v >= spec.min && v <= spec.max) return v;
    }
    throw DomainError(
        "truncated normal rejection sampling did not terminate; the "
        "distribution has negligible mass inside [min,max]");
}

std::vector<InstanceRecord> sample_human_properties(const Manifest& manifest,
                                                    std::uint64_t seed) {
    std::vector<InstanceRecord> records;
    records.reserve(static_cast<std::size_t>(manifest.total_instances()));
    for (const auto& cls : manifest.classes) {
        for (int i = 1; i <= cls.instance_count; ++i) {
            InstanceRecord rec;
            rec.instance_id = cls.label + "_" + std::to_string(i);
            rec.class_label = cls.label;
            for (const auto& spec : manifest.human_properties) {
                const auto& d = spec.per_class.at(cls.label);
                if (!d.has_value()) continue;
                const std::uint64_t stream = draw_stream_seed(
                    seed, cls.label, spec.property.label, i);
                rec.measurements[spec.property.label] =
                    sample_truncated_normal(*d, stream);
            }
            records.push_back(std::move(rec));
        }
    }
    std::sort(records.begin(), records.end(),
              [](const InstanceRecord& a, const InstanceRecord& b) {
                  return a.instance_id < b.instance_id;
              });
    return records;
}

std::vector<InstanceRecord> load_machine_properties(
    std::vector<InstanceRecord> records, const MachinePropertyFile& file,
    int expected_dim) {
    if (file.dim != expected_dim) {
        throw SchemaError("machine property dim " + std::to_string(file.dim) +
                          " does not match manifest machine_property_dim " +
                          std::to_string(expected_dim));
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) {
        index[records[i].instance_id] = i;
    }
    for (const auto& [id, vec] : file.rows) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw SchemaError("machine property row for unknown instance '" +
                              id + "'");
        }
        InstanceRecord& rec = records[it->second];
        for (std::size_t k = 0; k < vec.size(); ++k) {
            rec.measurements[machine_property_label(static_cast<int>(k))] =
                vec[k];
        }
    }
    return records;
}

}  // namespace ersatz
