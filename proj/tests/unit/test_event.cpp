#include "hashgraph/event.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hashgraph;

namespace {

Event sample(std::mt19937_64& rng, const Pki& pki)
{
    Event e;
    e.creator = static_cast<PartyId>(rng() % pki.size());
    e.timestamp = static_cast<std::int64_t>(rng()) >> 8;
    const auto txs = rng() % 4;
    for (std::uint64_t i = 0; i < txs; ++i) e.transactions.push_back(Bytes(rng() % 9, static_cast<std::uint8_t>(i)));
    if (rng() % 3 != 0) {
        e.self_parent = hash_bytes(Bytes{static_cast<std::uint8_t>(rng())});
        e.other_parent = hash_bytes(Bytes{static_cast<std::uint8_t>(rng()), 1});
    }
    return signed_event(e, pki.key(e.creator));
}

}  // namespace

TEST(Event, EncodeDecodeRoundTrip)
{
    const Pki pki(5, 1);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const Event e = sample(rng, pki);
        EXPECT_EQ(decode(encode(e)), e);
    }
}

TEST(Event, LayoutIsBigEndianWithFlags)
{
    Event e;
    e.creator = 0x01020304;
    e.timestamp = 0x0A0B;
    e.transactions = {Bytes{0xAA, 0xBB}};
    const Bytes b = encode(e);
    ASSERT_EQ(b.size(), 1 + 4 + 8 + 4 + 4 + 2 + 1 + 32U);
    EXPECT_EQ(b[0], kEncodingVersion);
    EXPECT_EQ(Bytes(b.begin() + 1, b.begin() + 5), (Bytes{1, 2, 3, 4}));
    EXPECT_EQ(Bytes(b.begin() + 5, b.begin() + 13), (Bytes{0, 0, 0, 0, 0, 0, 0x0A, 0x0B}));
    EXPECT_EQ(Bytes(b.begin() + 13, b.begin() + 17), (Bytes{0, 0, 0, 1}));
    EXPECT_EQ(Bytes(b.begin() + 17, b.begin() + 21), (Bytes{0, 0, 0, 2}));
    EXPECT_EQ(b[23], 0x00);  // genesis: neither parent flag set

    e.self_parent = Digest{};
    e.other_parent = Digest{};
    const Bytes c = encode(e);
    EXPECT_EQ(c.size(), b.size() + 64);
    EXPECT_EQ(c[23], kSelfParentFlag | kOtherParentFlag);
}

TEST(Event, TimestampChangesEncoding)
{
    Event a;
    Event b;
    b.timestamp = 1;
    EXPECT_NE(encode(a), encode(b));
    EXPECT_NE(event_id(a), event_id(b));
}

TEST(Event, SignatureCoversEverythingButItself)
{
    const Pki pki(2, 1);
    Event e = signed_event(Event{1, 5, {}, std::nullopt, std::nullopt, {}}, pki.key(1));
    const Bytes s = signing_bytes(e);
    const Bytes full = encode(e);
    EXPECT_EQ(Bytes(full.begin(), full.end() - 32), s);
    EXPECT_TRUE(pki.verify(PartyId{1}, s, e.signature));
    EXPECT_EQ(event_id(e), hash_bytes(full));

    Event tampered = e;
    tampered.timestamp = 6;
    EXPECT_FALSE(pki.verify(PartyId{1}, signing_bytes(tampered), e.signature));
}

TEST(Event, RejectsMalformedBytes)
{
    const Bytes good = encode(Event{});
    EXPECT_THROW(decode(Bytes(good.begin(), good.end() - 1)), DecodeError);
    Bytes longer = good;
    longer.push_back(0);
    EXPECT_THROW(decode(longer), DecodeError);
    Bytes version = good;
    version[0] = 0x02;
    EXPECT_THROW(decode(version), DecodeError);
    Bytes flags = good;
    flags[17] = 0x04;
    EXPECT_THROW(decode(flags), DecodeError);
}
