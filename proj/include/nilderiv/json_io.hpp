#ifndef NILDERIV_JSON_IO_HPP
#define NILDERIV_JSON_IO_HPP

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nilderiv/derivation.hpp"
#include "nilderiv/descent.hpp"
#include "nilderiv/harper.hpp"

namespace nilderiv {

using Json = nlohmann::json;

/// Parses text; malformed input raises ParseError naming the byte offset.
Json parse_json(std::string_view text, const std::string& origin = "input");
/// Inline JSON when `arg` starts with '{' or '[', a file path otherwise.
Json load_json(const std::string& arg);

// Canonical formats. Readers raise ParseError on a shape mismatch and
// BadInput on a value the library rejects.

Json to_json(const FieldSpec& spec);
FieldSpec field_spec_from_json(const Json& j);

/// Field element as its digit array [c_0, ..., c_{m-1}].
Json to_json(const Fq& a);
Fq fq_from_json(const GaloisField& field, const Json& j);

/// {"p", "m", "irr", "n"}; "irr" may be omitted for the built-in default.
Json to_json(const RingSpec& spec);
RingSpec ring_spec_from_json(const Json& j);

/// {"coeffs": [[alpha, digits], ...]} sorted by alpha, zero terms omitted.
Json to_json(const RingElement& a);
RingElement element_from_json(const Ring& ring, const Json& j);

Json to_json(const std::vector<RingElement>& elems);
std::vector<RingElement> elements_from_json(const Ring& ring, const Json& j);

/// {"images": [elem_0, ..., elem_{n-1}]}.
Json to_json(const Derivation& d);
Derivation derivation_from_json(const Ring& ring, const Json& j);

Json to_json(const std::vector<Derivation>& ds);
std::vector<Derivation> derivations_from_json(const Ring& ring, const Json& j);

/// {"exponent": s, "pillars": [...]}; the sequence is rebuilt from the pillars.
Json to_json(const IterativeDescent& seq);
IterativeDescent descent_from_json(const Ring& ring, const Json& j);

/// {"field_basis": [...], "generators": [...]}.
Json to_json(const Frame& frame);
Frame frame_from_json(const Ring& ring, const Json& j);

/// {"frobenius": e, "images": [...]}.
Json to_json(const RingAutomorphism& sigma);
RingAutomorphism automorphism_from_json(const Ring& ring, const Json& j);

/// Square matrix over R as rows of elements.
Json to_json(const RingMatrix& m);
/// Matrix over F_q as rows of digit arrays.
Json matrix_to_json(const FqMatrix& m);

}  // namespace nilderiv

#endif  // NILDERIV_JSON_IO_HPP
