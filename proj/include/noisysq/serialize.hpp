#pragma once

// JSON forms for every closed spec type, with a "variant" discriminator.
// Field names are documented in docs/schemas.md.

#include <json.hpp>

#include "noisysq/learners.hpp"
#include "noisysq/noise.hpp"
#include "noisysq/query.hpp"

namespace noisysq {

using json = nlohmann::json;

json to_json(const MarginalSpec& m);
MarginalSpec marginal_from_json(const json& j);

json to_json(const Concept& c);
Concept concept_from_json(const json& j);

json to_json(const NoiseSpec& n);
NoiseSpec noise_from_json(const json& j);

json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const json& j);

json to_json(const QuerySpec& q);
QuerySpec query_from_json(const json& j);

}  // namespace noisysq
