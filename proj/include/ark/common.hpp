#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ark {

using Amount = std::int64_t;   // sats
using Height = std::int64_t;   // block height
using PartyId = std::string;

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

enum class Errc {
    InvalidArgument,
    ZeroScalar,
    InvalidPoint,
    SessionAborted,
    HashCollision,
    NotReused,
    Precondition,
    InvalidSignature,
    DuplicateMember,
    EmptySet,
    NotALeaf,
    InsufficientFunds,
    InsufficientLiquidity,
    ValueOverflow,
    UnknownParty,
    UnknownVtxo,
    AlreadyPending,
    ValueExceeded,
    MissingReset,
    DoubleSpend,
    Rejected,
    Config,
    UnknownScenario,
    Parse,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

// Thrown by any interactive signing step that cannot complete.
class SessionAborted : public Error {
public:
    SessionAborted(int step, PartyId party, const std::string& why)
        : Error(Errc::SessionAborted, "session aborted at step " + std::to_string(step) + " by " +
                                          party + ": " + why),
          step_(step), party_(std::move(party)) {}
    int step() const { return step_; }
    const PartyId& party() const { return party_; }

private:
    int step_;
    PartyId party_;
};

std::string to_hex(ByteView b);
Bytes from_hex(std::string_view s);

template <std::size_t N>
std::array<std::uint8_t, N> array_from_hex(std::string_view s)
{
    Bytes b = from_hex(s);
    if (b.size() != N) throw Error(Errc::Parse, "hex length mismatch");
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = b[i];
    return out;
}

// Append helpers for the binary encodings that get hashed.
inline void put_u8(Bytes& out, std::uint8_t v) { out.push_back(v); }
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
inline void put_i64(Bytes& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }
inline void put_bytes(Bytes& out, ByteView b) { out.insert(out.end(), b.begin(), b.end()); }
inline void put_str(Bytes& out, std::string_view s)
{
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

} // namespace ark
