#include "ark/crypto.hpp"

#include <doctest.h>

#include <random>

using namespace ark;
using namespace ark::crypto;

namespace {

Bytes msg(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes random_bytes(std::mt19937_64& rng, std::size_t n)
{
    Bytes b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    return b;
}

std::array<std::uint8_t, 32> random_seed(std::mt19937_64& rng)
{
    std::array<std::uint8_t, 32> s{};
    for (auto& x : s) x = static_cast<std::uint8_t>(rng());
    return s;
}

template <class F>
Errc code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

} // namespace

TEST_CASE("sha256 and tagged hash match hashlib")
{
    // FIPS 180-2 "abc" vector
    CHECK(sha256(msg("abc")).hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // tag prefix = u32le(len) || tag, computed with python hashlib
    CHECK(tagged_hash("ark/test", msg("abc")).hex() ==
          "408fe4f19f2d218a594618d8e28b3a9cbef948f986252b438a691a075a1d2a4d");
}

TEST_CASE("keygen")
{
    std::array<std::uint8_t, 32> one{};
    one[31] = 1;
    auto kp = keygen(one);
    CHECK(kp.pk == mul_base(kp.sk));
    CHECK(verify(kp.pk, msg("m"), sign(kp.sk, msg("m"))));
    CHECK(keygen(one).pk == kp.pk);

    std::array<std::uint8_t, 32> two{};
    two[31] = 2;
    CHECK_FALSE(keygen(two).pk == kp.pk);

    CHECK(keypair_from_secret(Scalar::from_u64(1)).pk == Point::generator());
    CHECK(code_of([] { keypair_from_secret(Scalar::from_u64(0)); }) == Errc::ZeroScalar);
}

TEST_CASE("sign and verify")
{
    auto a = keygen_from_label("alice");
    auto b = keygen_from_label("bob");
    auto m = msg("pay bob");
    auto sig = sign(a.sk, m);
    CHECK(verify(a.pk, m, sig));
    CHECK_FALSE(verify(b.pk, m, sig));
    CHECK_FALSE(verify(a.pk, msg("pay carol"), sig));

    auto bad = sig;
    bad.s.b[0] ^= 1;
    CHECK_FALSE(verify(a.pk, m, bad));

    // the verification equation itself: R = s·G - H(R||pk||m)·pk
    CHECK(sig.R == mul_base(sig.s) - mul(challenge(sig.R, a.pk, m), a.pk));

    Scalar r = Scalar::from_u64(12345);
    auto f1 = sign(a.sk, msg("m1"), Fixed{r});
    auto f2 = sign(a.sk, msg("m2"), Fixed{r});
    CHECK(f1.R == f2.R);
    CHECK(f1.R == mul_base(r));
    CHECK(verify(a.pk, msg("m1"), f1));
    CHECK(code_of([&] { sign(a.sk, msg("m"), Fixed{Scalar::from_u64(0)}); }) == Errc::ZeroScalar);
}

TEST_CASE("malformed points do not verify")
{
    auto a = keygen_from_label("alice");
    auto sig = sign(a.sk, msg("m"));
    Point junk;
    junk.b.fill(0xff);
    CHECK_FALSE(junk.valid());
    CHECK_FALSE(verify(junk, msg("m"), sig));
    sig.R = junk;
    CHECK_FALSE(verify(a.pk, msg("m"), sig));
}

TEST_CASE("aggregate")
{
    auto a = keygen_from_label("A");
    auto o = keygen_from_label("O");
    auto c = keygen_from_label("C");

    auto solo = aggregate({a.pk});
    std::vector<SecretKey> only_a{a.sk};
    CHECK(verify(solo.point, msg("d"), cosign(msg("d"), solo, only_a)));

    CHECK(aggregate({a.pk, o.pk}) == aggregate({o.pk, a.pk}));

    std::vector<SecretKey> both{a.sk, o.sk};
    auto sig = cosign(msg("d"), both);
    CHECK(verify(aggregate({a.pk, o.pk}).point, msg("d"), sig));
    CHECK_FALSE(verify(aggregate({a.pk}).point, msg("d"), sig));

    std::vector<SecretKey> three{a.sk, o.sk, c.sk};
    CHECK(verify(aggregate({c.pk, a.pk, o.pk}).point, msg("tx"), cosign(msg("tx"), three)));

    CHECK(code_of([] { aggregate({}); }) == Errc::EmptySet);
    CHECK(code_of([&] { aggregate({a.pk, a.pk}); }) == Errc::DuplicateMember);
}

TEST_CASE("cosign aborts when a signer is missing")
{
    auto a = keygen_from_label("A");
    auto o = keygen_from_label("O");
    auto key = aggregate({a.pk, o.pk});
    std::vector<SecretKey> partial{a.sk};
    CHECK_THROWS_AS(cosign(msg("d"), key, partial), SessionAborted);

    SigningSession s(key, msg("d"));
    s.commit(a.sk);
    CHECK_FALSE(s.nonces_complete());
    CHECK_THROWS_AS(s.respond(a.sk), Error);
    CHECK_THROWS_AS(s.finish(), SessionAborted);
    s.commit(o.sk);
    s.respond(a.sk);
    CHECK(s.missing() == std::vector<PublicKey>{o.pk});
    CHECK_THROWS_AS(s.finish(), SessionAborted);
    s.respond(o.sk);
    CHECK(verify(key.point, msg("d"), s.finish()));
}

TEST_CASE("extract_secret")
{
    auto kp = keypair_from_secret(Scalar::from_u64(7));
    Scalar r = Scalar::from_u64(99);
    auto s1 = sign(kp.sk, msg("m1"), Fixed{r});
    auto s2 = sign(kp.sk, msg("m2"), Fixed{r});
    CHECK(extract_secret(kp.pk, msg("m1"), s1, msg("m2"), s2) == Scalar::from_u64(7));

    auto fresh1 = sign(kp.sk, msg("m1"));
    auto fresh2 = sign(kp.sk, msg("m2"));
    CHECK(code_of([&] { extract_secret(kp.pk, msg("m1"), fresh1, msg("m2"), fresh2); }) == Errc::NotReused);
    CHECK(code_of([&] { extract_secret(kp.pk, msg("m1"), s1, msg("m1"), s1); }) == Errc::Precondition);
}

TEST_CASE("property: sign/verify round trip and single-bit mutations")
{
    std::mt19937_64 rng(0xC0FFEE);
    for (int i = 0; i < 64; ++i) {
        auto kp = keygen(random_seed(rng));
        Bytes m = random_bytes(rng, 1 + rng() % 64);
        auto sig = sign(kp.sk, m);
        REQUIRE(verify(kp.pk, m, sig));

        Bytes m2 = m;
        m2[rng() % m2.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        CHECK_FALSE(verify(kp.pk, m2, sig));

        auto r2 = sig;
        r2.R.b[rng() % 32] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        CHECK_FALSE(verify(kp.pk, m, r2));

        auto s2 = sig;
        s2.s.b[rng() % 31] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
        CHECK_FALSE(verify(kp.pk, m, s2));
    }
}

TEST_CASE("property: extraction recovers random keys")
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 32; ++i) {
        auto kp = keygen(random_seed(rng));
        Scalar r = derive_fixed_nonce(kp.sk, "case" + std::to_string(i));
        Bytes m1 = random_bytes(rng, 32), m2 = random_bytes(rng, 32);
        if (m1 == m2) continue;
        auto s1 = sign(kp.sk, m1, Fixed{r});
        auto s2 = sign(kp.sk, m2, Fixed{r});
        CHECK(extract_secret(kp.pk, m1, s1, m2, s2) == kp.sk);
    }
}

TEST_CASE("property: aggregation is permutation invariant")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 16; ++i) {
        std::vector<PublicKey> pks;
        for (int j = 0; j < 2 + i % 5; ++j) pks.push_back(keygen(random_seed(rng)).pk);
        auto base = aggregate(pks);
        for (int t = 0; t < 4; ++t) {
            std::shuffle(pks.begin(), pks.end(), rng);
            CHECK(aggregate(pks) == base);
        }
    }
}
