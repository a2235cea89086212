#pragma once

// Canonical JSON for keys, predicates, locks and transactions. Object keys are
// emitted sorted, so dump() output is byte-stable.

#include "ark/ledger.hpp"

#include <json.hpp>

namespace ark::io {

using json = nlohmann::json;

json to_json(const crypto::Point& p);
json to_json(const crypto::Scalar& s);
json to_json(const crypto::Signature& s);
json to_json(const script::Predicate& p);
json to_json(const script::LockScript& l);
json to_json(const script::Witness& w);
json to_json(const OutPoint& op);
json to_json(const Output& o);
json to_json(const Tx& tx);

crypto::Point point_from_json(const json& j);
crypto::Scalar scalar_from_json(const json& j);
crypto::Signature signature_from_json(const json& j);
script::Predicate predicate_from_json(const json& j);
script::LockScript lock_from_json(const json& j);
script::Witness witness_from_json(const json& j);
OutPoint outpoint_from_json(const json& j);
Output output_from_json(const json& j);
Tx tx_from_json(const json& j);

} // namespace ark::io
