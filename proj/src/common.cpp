#include "ark/common.hpp"

namespace ark {

const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroScalar: return "ZeroScalar";
    case Errc::InvalidPoint: return "InvalidPoint";
    case Errc::SessionAborted: return "SessionAborted";
    case Errc::HashCollision: return "HashCollision";
    case Errc::NotReused: return "NotReused";
    case Errc::Precondition: return "Precondition";
    case Errc::InvalidSignature: return "InvalidSignature";
    case Errc::DuplicateMember: return "DuplicateMember";
    case Errc::EmptySet: return "EmptySet";
    case Errc::NotALeaf: return "NotALeaf";
    case Errc::InsufficientFunds: return "InsufficientFunds";
    case Errc::InsufficientLiquidity: return "InsufficientLiquidity";
    case Errc::ValueOverflow: return "ValueOverflow";
    case Errc::UnknownParty: return "UnknownParty";
    case Errc::UnknownVtxo: return "UnknownVtxo";
    case Errc::AlreadyPending: return "AlreadyPending";
    case Errc::ValueExceeded: return "ValueExceeded";
    case Errc::MissingReset: return "MissingReset";
    case Errc::DoubleSpend: return "DoubleSpend";
    case Errc::Rejected: return "Rejected";
    case Errc::Config: return "Config";
    case Errc::UnknownScenario: return "UnknownScenario";
    case Errc::Parse: return "Parse";
    }
    return "?";
}

std::string to_hex(ByteView b)
{
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (auto c : b) {
        s.push_back(digits[c >> 4]);
        s.push_back(digits[c & 15]);
    }
    return s;
}

static int nibble(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

Bytes from_hex(std::string_view s)
{
    if (s.size() % 2) throw Error(Errc::Parse, "odd hex length");
    Bytes out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(s[2 * i]), lo = nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::Parse, "bad hex digit");
        out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
    }
    return out;
}

void put_u32(Bytes& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace ark
