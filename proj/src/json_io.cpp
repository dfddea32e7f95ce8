#include "nilderiv/json_io.hpp"

#include <fstream>
#include <sstream>

namespace nilderiv {

namespace {

[[noreturn]] void shape_error(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const Json& field(const Json& j, const char* key, const char* type) {
    if (!j.is_object()) shape_error(std::string("expected a JSON object for ") + type);
    auto it = j.find(key);
    if (it == j.end()) shape_error(std::string(type) + " is missing \"" + key + "\"");
    return *it;
}

std::uint32_t as_uint(const Json& j, const char* what) {
    if (!j.is_number_integer() || j.get<std::int64_t>() < 0 || j.get<std::int64_t>() > 0xffffffffLL) {
        shape_error(std::string(what) + " must be a non-negative integer");
    }
    return j.get<std::uint32_t>();
}

std::vector<std::uint32_t> as_uint_array(const Json& j, const char* what) {
    if (!j.is_array()) shape_error(std::string(what) + " must be an array");
    std::vector<std::uint32_t> out;
    for (const auto& v : j) out.push_back(as_uint(v, what));
    return out;
}

const Json& as_array(const Json& j, const char* what) {
    if (!j.is_array()) shape_error(std::string(what) + " must be an array");
    return j;
}

}  // namespace

Json parse_json(std::string_view text, const std::string& origin) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError,
                    "malformed JSON in " + origin + " at byte " + std::to_string(e.byte) + ": " + e.what());
    }
}

Json load_json(const std::string& arg) {
    const auto first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (arg[first] == '{' || arg[first] == '[')) return parse_json(arg, "inline JSON");
    std::ifstream in(arg);
    if (!in) throw Error(ErrorKind::BadInput, "cannot read " + arg);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_json(buf.str(), arg);
}

Json to_json(const FieldSpec& spec) { return Json{{"p", spec.p}, {"m", spec.m}, {"irr", spec.irr}}; }

FieldSpec field_spec_from_json(const Json& j) {
    const std::uint32_t p = as_uint(field(j, "p", "FieldSpec"), "p");
    const std::uint32_t m = j.contains("m") ? as_uint(j["m"], "m") : 1;
    std::vector<std::uint32_t> irr;
    if (j.contains("irr")) irr = as_uint_array(j["irr"], "irr");
    return make_field_spec(p, m, std::move(irr));
}

Json to_json(const Fq& a) { return a.digits(); }

Fq fq_from_json(const GaloisField& f, const Json& j) {
    if (j.is_number_integer()) {
        if (f.degree() != 1) shape_error("field elements of F_q with m > 1 must be digit arrays");
        return f.from_int(j.get<std::int64_t>());
    }
    const auto digits = as_uint_array(j, "field element");
    if (digits.size() != f.degree()) shape_error("field element needs exactly m digits");
    for (auto d : digits)
        if (d >= f.characteristic()) shape_error("field element digit out of range");
    return f.from_digits(digits);
}

Json to_json(const RingSpec& spec) {
    Json j = to_json(spec.field);
    j["n"] = spec.n;
    return j;
}

RingSpec ring_spec_from_json(const Json& j) {
    RingSpec spec;
    spec.field = field_spec_from_json(j);
    spec.n = as_uint(field(j, "n", "RingSpec"), "n");
    return spec;
}

Json to_json(const RingElement& a) {
    Json terms = Json::array();
    for (const auto& [alpha, c] : nonzero_terms(a)) terms.push_back(Json::array({alpha, to_json(c)}));
    return Json{{"coeffs", terms}};
}

RingElement element_from_json(const Ring& ring, const Json& j) {
    const Json& terms = as_array(field(j, "coeffs", "RingElement"), "coeffs");
    FqVector v = FqVector::Constant(static_cast<Eigen::Index>(ring.dimension()), ring.field().zero());
    for (const auto& term : terms) {
        if (!term.is_array() || term.size() != 2) shape_error("each term must be [alpha, coefficient]");
        const MultiIndex alpha = as_uint_array(term[0], "alpha");
        if (alpha.size() != ring.n()) shape_error("alpha needs exactly n entries");
        for (auto a : alpha)
            if (a >= ring.p()) shape_error("exponent in alpha must be below p");
        const auto s = static_cast<Eigen::Index>(ring.slot(alpha));
        v(s) += fq_from_json(ring.field(), term[1]);
    }
    return ring.from_coeffs(std::move(v));
}

Json to_json(const std::vector<RingElement>& elems) {
    Json out = Json::array();
    for (const auto& e : elems) out.push_back(to_json(e));
    return out;
}

std::vector<RingElement> elements_from_json(const Ring& ring, const Json& j) {
    std::vector<RingElement> out;
    for (const auto& e : as_array(j, "element list")) out.push_back(element_from_json(ring, e));
    return out;
}

Json to_json(const Derivation& d) { return Json{{"images", to_json(d.images())}}; }

Derivation derivation_from_json(const Ring& ring, const Json& j) {
    auto images = elements_from_json(ring, field(j, "images", "Derivation"));
    if (images.size() != ring.n()) throw Error(ErrorKind::BadInput, "a derivation needs exactly n images");
    return Derivation(ring, std::move(images));
}

Json to_json(const std::vector<Derivation>& ds) {
    Json out = Json::array();
    for (const auto& d : ds) out.push_back(to_json(d));
    return out;
}

std::vector<Derivation> derivations_from_json(const Ring& ring, const Json& j) {
    std::vector<Derivation> out;
    for (const auto& d : as_array(j, "derivation list")) out.push_back(derivation_from_json(ring, d));
    return out;
}

Json to_json(const IterativeDescent& seq) { return Json{{"exponent", seq.exponent}, {"pillars", to_json(seq.pillars())}}; }

IterativeDescent descent_from_json(const Ring& ring, const Json& j) {
    const std::uint32_t s = as_uint(field(j, "exponent", "IterativeDescent"), "exponent");
    const auto pillars = elements_from_json(ring, field(j, "pillars", "IterativeDescent"));
    if (pillars.size() != s) throw Error(ErrorKind::BadInput, "a descent of exponent s needs exactly s pillars");
    return sequence_from_pillars(ring, pillars);
}

Json to_json(const Frame& frame) {
    return Json{{"field_basis", to_json(frame.field_basis)}, {"generators", to_json(frame.generators)}};
}

Frame frame_from_json(const Ring& ring, const Json& j) {
    return Frame{&ring, elements_from_json(ring, field(j, "field_basis", "Frame")),
                 elements_from_json(ring, field(j, "generators", "Frame"))};
}

Json to_json(const RingAutomorphism& sigma) {
    return Json{{"frobenius", sigma.frobenius()}, {"images", to_json(sigma.images())}};
}

RingAutomorphism automorphism_from_json(const Ring& ring, const Json& j) {
    const std::uint32_t e = j.contains("frobenius") ? as_uint(j["frobenius"], "frobenius") : 0;
    return RingAutomorphism(ring, e, elements_from_json(ring, field(j, "images", "RingAutomorphism")));
}

Json to_json(const RingMatrix& m) {
    Json out = Json::array();
    for (const auto& row : m) out.push_back(to_json(row));
    return out;
}

Json matrix_to_json(const FqMatrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        out.push_back(row);
    }
    return out;
}

}  // namespace nilderiv
