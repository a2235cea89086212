#include "ark/json_io.hpp"

namespace ark::io {

using script::Kind;
using script::Predicate;

json to_json(const crypto::Point& p) { return p.hex(); }
json to_json(const crypto::Scalar& s) { return s.hex(); }
json to_json(const crypto::Signature& s) { return {{"R", s.R.hex()}, {"s", s.s.hex()}}; }

json to_json(const Predicate& p)
{
    json j = {{"kind", script::kind_name(p.kind)}};
    switch (p.kind) {
    case Kind::CheckSig: j["pk"] = p.pk.hex(); break;
    case Kind::CheckAggSig: {
        j["pk"] = p.agg.point.hex();
        json m = json::array();
        for (auto& k : p.agg.members) m.push_back(k.hex());
        j["members"] = m;
        break;
    }
    case Kind::AbsTimelock:
    case Kind::RelTimelock: j["blocks"] = p.blocks; break;
    case Kind::And: {
        json c = json::array();
        for (auto& ch : p.children) c.push_back(to_json(ch));
        j["children"] = c;
        break;
    }
    case Kind::NonceBound:
        j["pk"] = p.pk.hex();
        j["r_star"] = p.r_star.hex();
        break;
    case Kind::AlwaysTrue: break;
    }
    return j;
}

json to_json(const script::LockScript& l)
{
    json paths = json::array();
    for (auto& p : l.paths) paths.push_back(to_json(p));
    json j = {{"commitment", l.commitment.hex()}, {"paths", paths}};
    j["internal"] = l.internal_key ? json(l.internal_key->hex()) : json(nullptr);
    if (l.burn) j["burn"] = true;
    return j;
}

json to_json(const script::Witness& w)
{
    json sigs = json::array();
    for (auto& s : w.sigs) sigs.push_back(to_json(s));
    json paths = json::array();
    for (auto& p : w.revealed_paths) paths.push_back(to_json(p));
    json j = {{"sigs", sigs}, {"paths", paths}};
    j["path"] = w.path ? json(*w.path) : json(nullptr);
    j["internal"] = w.revealed_internal ? json(w.revealed_internal->hex()) : json(nullptr);
    return j;
}

json to_json(const OutPoint& op) { return {{"txid", op.txid.hex()}, {"vout", op.vout}}; }

json to_json(const Output& o) { return {{"value", o.value}, {"lock", to_json(o.lock)}}; }

json to_json(const Tx& tx)
{
    json ins = json::array(), outs = json::array(), wits = json::array();
    for (auto& i : tx.ins) ins.push_back(to_json(i));
    for (auto& o : tx.outs) outs.push_back(to_json(o));
    for (auto& w : tx.wits) wits.push_back(to_json(w));
    return {{"txid", tx.txid().hex()}, {"ins", ins}, {"outs", outs}, {"wits", wits},
            {"locktime", tx.locktime}};
}

crypto::Point point_from_json(const json& j) { return crypto::Point::from_hex(j.get<std::string>()); }
crypto::Scalar scalar_from_json(const json& j) { return crypto::Scalar::from_hex(j.get<std::string>()); }

crypto::Signature signature_from_json(const json& j)
{
    return {point_from_json(j.at("R")), scalar_from_json(j.at("s"))};
}

static Kind kind_from_name(const std::string& s)
{
    for (Kind k : {Kind::CheckSig, Kind::CheckAggSig, Kind::AbsTimelock, Kind::RelTimelock, Kind::And,
                   Kind::NonceBound, Kind::AlwaysTrue})
        if (s == script::kind_name(k)) return k;
    throw Error(Errc::Parse, "unknown predicate kind " + s);
}

Predicate predicate_from_json(const json& j)
{
    switch (kind_from_name(j.at("kind").get<std::string>())) {
    case Kind::CheckSig: return Predicate::check_sig(point_from_json(j.at("pk")));
    case Kind::CheckAggSig: {
        std::vector<crypto::PublicKey> m;
        for (auto& k : j.at("members")) m.push_back(point_from_json(k));
        auto agg = crypto::aggregate(std::move(m));
        if (agg.point != point_from_json(j.at("pk")))
            throw Error(Errc::Parse, "aggregate key does not match members");
        return Predicate::check_agg_sig(agg);
    }
    case Kind::AbsTimelock: return Predicate::abs_timelock(j.at("blocks").get<Height>());
    case Kind::RelTimelock: return Predicate::rel_timelock(j.at("blocks").get<Height>());
    case Kind::And: {
        std::vector<Predicate> c;
        for (auto& ch : j.at("children")) c.push_back(predicate_from_json(ch));
        return Predicate::all(std::move(c));
    }
    case Kind::NonceBound:
        return Predicate::nonce_bound(point_from_json(j.at("pk")), point_from_json(j.at("r_star")));
    case Kind::AlwaysTrue: return Predicate::always_true();
    }
    throw Error(Errc::Parse, "bad predicate");
}

script::LockScript lock_from_json(const json& j)
{
    script::LockScript l;
    if (j.value("burn", false)) {
        l = script::burn_lock();
    } else {
        std::optional<crypto::PublicKey> internal;
        if (!j.at("internal").is_null()) internal = point_from_json(j.at("internal"));
        std::vector<Predicate> paths;
        for (auto& p : j.at("paths")) paths.push_back(predicate_from_json(p));
        l = script::taproot(internal, std::move(paths));
    }
    if (j.contains("commitment") && l.commitment.hex() != j.at("commitment").get<std::string>())
        throw Error(Errc::Parse, "lock commitment mismatch");
    return l;
}

script::Witness witness_from_json(const json& j)
{
    script::Witness w;
    if (!j.at("path").is_null()) w.path = j.at("path").get<std::uint32_t>();
    for (auto& s : j.at("sigs")) w.sigs.push_back(signature_from_json(s));
    if (!j.at("internal").is_null()) w.revealed_internal = point_from_json(j.at("internal"));
    for (auto& p : j.at("paths")) w.revealed_paths.push_back(predicate_from_json(p));
    return w;
}

OutPoint outpoint_from_json(const json& j)
{
    return {TxId::from_hex(j.at("txid").get<std::string>()), j.at("vout").get<std::uint32_t>()};
}

Output output_from_json(const json& j) { return {j.at("value").get<Amount>(), lock_from_json(j.at("lock"))}; }

Tx tx_from_json(const json& j)
{
    Tx tx;
    for (auto& i : j.at("ins")) tx.ins.push_back(outpoint_from_json(i));
    for (auto& o : j.at("outs")) tx.outs.push_back(output_from_json(o));
    for (auto& w : j.at("wits")) tx.wits.push_back(witness_from_json(w));
    tx.locktime = j.value("locktime", 0u);
    if (j.contains("txid") && tx.txid().hex() != j.at("txid").get<std::string>())
        throw Error(Errc::Parse, "txid mismatch");
    return tx;
}

} // namespace ark::io
