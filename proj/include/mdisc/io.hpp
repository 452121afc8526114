// Copyright 2026 The mdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Text formats for apparatus and scheme files. Complex entries are written as
// [re, im] pairs; doubles are printed with round-trip precision so parse and
// serialize are entry-exact inverses.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mdisc/apparatus.hpp"
#include "mdisc/errors.hpp"
#include "mdisc/schemes.hpp"

namespace mdisc::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace detail {

[[noreturn]] inline void shape_error(const std::string &path, const std::string &what) {
    throw ParseError(path + ": " + what, 0);
}

inline const Json &field(const Json &obj, const char *key, const std::string &path) {
    if (!obj.is_object()) {
        shape_error(path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        shape_error(path, std::string("missing field \"") + key + "\"");
    }
    return *it;
}

inline std::int64_t integer(const Json &j, const std::string &path) {
    if (!j.is_number_integer()) {
        shape_error(path, "expected an integer");
    }
    return j.get<std::int64_t>();
}

inline Complex complex_of(const Json &j, const std::string &path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        shape_error(path, "expected a [re, im] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json json_of(Complex z) { return Json::array({z.real(), z.imag()}); }

inline void check_version(const Json &doc) {
    const auto v = integer(field(doc, "format_version", "$"), "$.format_version");
    if (v != kFormatVersion) {
        throw ParseError("unsupported format_version " + std::to_string(v) + " (expected " +
                             std::to_string(kFormatVersion) + ")",
                         0);
    }
}

}  // namespace detail

inline Json to_json(const Vector &v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(detail::json_of(v(i)));
    }
    return out;
}

inline Json to_json(const Matrix &m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(detail::json_of(m(r, c)));
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline Vector vector_from_json(const Json &j, const std::string &path) {
    if (!j.is_array() || j.empty()) {
        detail::shape_error(path, "expected a non-empty array of [re, im] pairs");
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = detail::complex_of(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

inline Matrix matrix_from_json(const Json &j, Eigen::Index rows, Eigen::Index cols, const std::string &path) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        detail::shape_error(path, "expected " + std::to_string(rows) + " rows");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto &row = j[static_cast<std::size_t>(r)];
        const std::string rpath = path + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            detail::shape_error(rpath, "expected " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = detail::complex_of(row[static_cast<std::size_t>(c)], rpath + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

/// Parses text as JSON, reporting the byte offset of syntax errors.
inline Json parse_json(const std::string &text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(std::string("syntax error: ") + e.what(), e.byte);
    }
}

/// Optional free-text metadata carried by apparatus files.
struct ApparatusMeta {
    std::string name;
    std::string description;
};

inline Json apparatus_to_json(const ProjectiveMeasurement &m, const ApparatusMeta &meta = {}) {
    Json doc;
    doc["format_version"] = kFormatVersion;
    if (!meta.name.empty()) {
        doc["name"] = meta.name;
    }
    if (!meta.description.empty()) {
        doc["description"] = meta.description;
    }
    doc["dim"] = m.dim;
    Json outcomes = Json::array();
    for (const auto &o : m.outcomes) {
        outcomes.push_back({{"label", o.label}, {"projector", to_json(o.projector)}});
    }
    doc["outcomes"] = std::move(outcomes);
    return doc;
}

/// Structural decoding only; no validation.
inline ProjectiveMeasurement apparatus_from_json(const Json &doc, const std::string &path = "$",
                                                 ApparatusMeta *meta = nullptr) {
    const auto dim = detail::integer(detail::field(doc, "dim", path), path + ".dim");
    if (dim < 1) {
        detail::shape_error(path + ".dim", "must be positive");
    }
    if (meta != nullptr) {
        if (auto it = doc.find("name"); it != doc.end() && it->is_string()) {
            meta->name = it->get<std::string>();
        }
        if (auto it = doc.find("description"); it != doc.end() && it->is_string()) {
            meta->description = it->get<std::string>();
        }
    }
    const auto &outcomes = detail::field(doc, "outcomes", path);
    if (!outcomes.is_array()) {
        detail::shape_error(path + ".outcomes", "expected an array");
    }
    ProjectiveMeasurement m{static_cast<Eigen::Index>(dim), {}};
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const std::string opath = path + ".outcomes[" + std::to_string(i) + "]";
        const auto &label = detail::field(outcomes[i], "label", opath);
        if (!label.is_string()) {
            detail::shape_error(opath + ".label", "expected a string");
        }
        m.outcomes.push_back({label.get<std::string>(),
                              matrix_from_json(detail::field(outcomes[i], "projector", opath), m.dim, m.dim,
                                               opath + ".projector")});
    }
    return m;
}

/// Parses and validates an apparatus file. Throws ParseError on syntax,
/// shape or version problems and ValidationError when the projectors do not
/// form a projective measurement.
inline ProjectiveMeasurement parse_apparatus(const std::string &text, const Tolerances &tol = {},
                                             ApparatusMeta *meta = nullptr) {
    const Json doc = parse_json(text);
    detail::check_version(doc);
    auto m = apparatus_from_json(doc, "$", meta);
    require_valid(m, tol);
    return m;
}

inline std::string serialize_apparatus(const ProjectiveMeasurement &m, const ApparatusMeta &meta = {}) {
    return apparatus_to_json(m, meta).dump(2) + "\n";
}

namespace detail {

inline Json hypotheses_to_json(const Hypotheses &h) {
    return {{"m", apparatus_to_json(h.m)}, {"n", apparatus_to_json(h.n)}};
}

inline Hypotheses hypotheses_from_json(const Json &j, const std::string &path, const Tolerances &tol) {
    Hypotheses h{apparatus_from_json(field(j, "m", path), path + ".m"),
                 apparatus_from_json(field(j, "n", path), path + ".n")};
    require_valid(h.m, tol);
    require_valid(h.n, tol);
    if (h.m.labels() != h.n.labels()) {
        shape_error(path, "apparatus label lists differ");
    }
    return h;
}

inline Json support_to_json(const std::vector<std::uint64_t> &s) {
    Json out = Json::array();
    for (auto x : s) {
        out.push_back(x);
    }
    return out;
}

inline std::vector<std::uint64_t> support_from_json(const Json &j, const std::string &path) {
    if (!j.is_array()) {
        shape_error(path, "expected an array of outcome strings");
    }
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_unsigned()) {
            shape_error(path + "[" + std::to_string(i) + "]", "expected a non-negative integer");
        }
        out.push_back(j[i].get<std::uint64_t>());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline BranchAction action_from(const std::string &s, const std::string &path) {
    for (auto a : {BranchAction::DecideM, BranchAction::DecideN, BranchAction::Measure, BranchAction::Unreachable}) {
        if (s == to_string(a)) {
            return a;
        }
    }
    shape_error(path, "unknown branch action \"" + s + "\"");
}

inline int positive_int(const Json &doc, const char *key, const std::string &path) {
    const auto v = integer(field(doc, key, path), path + "." + key);
    if (v < 1 || v > 64) {
        shape_error(path + "." + key, "out of range");
    }
    return static_cast<int>(v);
}

}  // namespace detail

inline Json scheme_to_json(const Scheme &scheme) {
    Json doc;
    doc["format_version"] = kFormatVersion;
    doc["kind"] = std::string(scheme_kind(scheme));
    doc["uses_per_trial"] = uses_per_trial(scheme);
    if (const auto *s = std::get_if<SimpleScheme>(&scheme)) {
        doc["uses"] = s->uses;
        doc["probe"] = to_json(s->probe);
        doc["support_m"] = detail::support_to_json(s->support_m);
        doc["support_n"] = detail::support_to_json(s->support_n);
        doc["apparatus"] = detail::hypotheses_to_json(s->apparatus);
    } else if (const auto *s = std::get_if<MMScheme>(&scheme)) {
        doc["uses"] = s->uses;
        doc["ancilla_dim"] = s->ancilla_dim;
        doc["probe"] = to_json(s->probe);
        Json branches = Json::array();
        for (const auto &b : s->branches) {
            Json entry{{"action", std::string(to_string(b.action))}};
            if (b.action == BranchAction::Measure) {
                entry["target"] = to_json(b.target);
            }
            branches.push_back(std::move(entry));
        }
        doc["branches"] = std::move(branches);
        doc["apparatus"] = detail::hypotheses_to_json(s->apparatus);
    } else {
        const auto &u = std::get<MUMScheme>(scheme);
        doc["dim"] = u.dim;
        doc["copies"] = u.copies;
        doc["probe"] = to_json(u.probe);
        Json unitaries = Json::array();
        for (const auto &w : u.unitaries) {
            unitaries.push_back(to_json(w));
        }
        doc["unitaries"] = std::move(unitaries);
        doc["apparatus"] = detail::hypotheses_to_json(u.apparatus);
    }
    return doc;
}

/// Rebuilds a scheme exactly as written; consistency between the probe, the
/// decision table and the apparatus is checked structurally.
inline Scheme scheme_from_json(const Json &doc, const Tolerances &tol = {}) {
    detail::check_version(doc);
    const auto &kind_j = detail::field(doc, "kind", "$");
    if (!kind_j.is_string()) {
        detail::shape_error("$.kind", "expected a string");
    }
    const std::string kind = kind_j.get<std::string>();
    const auto hyp = detail::hypotheses_from_json(detail::field(doc, "apparatus", "$"), "$.apparatus", tol);
    const Vector probe = vector_from_json(detail::field(doc, "probe", "$"), "$.probe");
    if (std::abs(probe.norm() - 1.0) > tol.norm) {
        throw ValidationError("$.probe: state is not normalized (norm " + std::to_string(probe.norm()) + ")");
    }
    const auto sys = [&](int uses) {
        return static_cast<Eigen::Index>(integer_power(static_cast<std::uint64_t>(hyp.m.dim), uses));
    };
    if (kind == "simple") {
        SimpleScheme s;
        s.uses = detail::positive_int(doc, "uses", "$");
        s.probe = probe;
        if (probe.size() % sys(s.uses) != 0) {
            detail::shape_error("$.probe", "length is not a multiple of dim^uses");
        }
        s.support_m = detail::support_from_json(detail::field(doc, "support_m", "$"), "$.support_m");
        s.support_n = detail::support_from_json(detail::field(doc, "support_n", "$"), "$.support_n");
        s.apparatus = hyp;
        return s;
    }
    if (kind == "mm") {
        MMScheme s;
        s.uses = detail::positive_int(doc, "uses", "$");
        s.ancilla_dim = detail::integer(detail::field(doc, "ancilla_dim", "$"), "$.ancilla_dim");
        s.probe = probe;
        if (s.ancilla_dim < 1 || probe.size() != sys(s.uses) * s.ancilla_dim) {
            detail::shape_error("$.probe", "length does not equal dim^uses * ancilla_dim");
        }
        const auto &branches = detail::field(doc, "branches", "$");
        if (!branches.is_array() || branches.size() != integer_power(hyp.m.size(), s.uses)) {
            detail::shape_error("$.branches", "expected one entry per outcome string");
        }
        for (std::size_t i = 0; i < branches.size(); ++i) {
            const std::string bpath = "$.branches[" + std::to_string(i) + "]";
            const auto &act = detail::field(branches[i], "action", bpath);
            if (!act.is_string()) {
                detail::shape_error(bpath + ".action", "expected a string");
            }
            MMBranch b{detail::action_from(act.get<std::string>(), bpath + ".action"), {}};
            if (b.action == BranchAction::Measure) {
                b.target = vector_from_json(detail::field(branches[i], "target", bpath), bpath + ".target");
                if (b.target.size() != s.ancilla_dim) {
                    detail::shape_error(bpath + ".target", "length does not equal ancilla_dim");
                }
            }
            s.branches.push_back(std::move(b));
        }
        s.apparatus = hyp;
        return s;
    }
    if (kind == "mum") {
        MUMScheme s;
        s.dim = detail::integer(detail::field(doc, "dim", "$"), "$.dim");
        s.copies = detail::positive_int(doc, "copies", "$");
        s.probe = probe;
        if (s.dim != hyp.m.dim || probe.size() != s.dim * s.dim) {
            detail::shape_error("$.probe", "length does not equal dim^2");
        }
        const auto &unitaries = detail::field(doc, "unitaries", "$");
        if (!unitaries.is_array() || unitaries.size() != hyp.m.size()) {
            detail::shape_error("$.unitaries", "expected one unitary per outcome");
        }
        for (std::size_t i = 0; i < unitaries.size(); ++i) {
            const std::string upath = "$.unitaries[" + std::to_string(i) + "]";
            Matrix u = matrix_from_json(unitaries[i], s.dim, s.dim, upath);
            if (unitary_deviation(u) > tol.norm * static_cast<double>(s.dim)) {
                throw ValidationError(upath + ": not unitary");
            }
            s.unitaries.push_back(std::move(u));
        }
        s.apparatus = hyp;
        return s;
    }
    detail::shape_error("$.kind", "unknown scheme kind \"" + kind + "\"");
}

inline Scheme parse_scheme(const std::string &text, const Tolerances &tol = {}) {
    return scheme_from_json(parse_json(text), tol);
}

inline std::string serialize_scheme(const Scheme &s) { return scheme_to_json(s).dump(2) + "\n"; }

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw std::runtime_error("cannot write " + path);
    }
}

}  // namespace mdisc::io
