#include "hashgraph/event.hpp"

#include <algorithm>

namespace hashgraph {

namespace {

void put_u32(Bytes& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(Bytes& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

template <class Tag>
void put_digest(Bytes& out, const Bytes32<Tag>& d)
{
    out.insert(out.end(), d.bytes.begin(), d.bytes.end());
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

    std::uint8_t u8()
    {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | bytes_[pos_++];
        return v;
    }

    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[pos_++];
        return v;
    }

    template <class Tag>
    Bytes32<Tag> digest()
    {
        need(kDigestSize);
        Bytes32<Tag> d;
        std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), kDigestSize, d.bytes.begin());
        pos_ += kDigestSize;
        return d;
    }

    Bytes blob(std::size_t len)
    {
        need(len);
        Bytes out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
        pos_ += len;
        return out;
    }

    [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t k) const
    {
        if (bytes_.size() - pos_ < k) throw DecodeError("truncated event encoding");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

Bytes signing_bytes(const Event& e)
{
    Bytes out;
    out.reserve(64 + 2 * kDigestSize);
    out.push_back(kEncodingVersion);
    put_u32(out, e.creator);
    put_u64(out, static_cast<std::uint64_t>(e.timestamp));
    put_u32(out, static_cast<std::uint32_t>(e.transactions.size()));
    for (const auto& tx : e.transactions) {
        put_u32(out, static_cast<std::uint32_t>(tx.size()));
        out.insert(out.end(), tx.begin(), tx.end());
    }
    std::uint8_t flags = 0;
    if (e.self_parent) flags |= kSelfParentFlag;
    if (e.other_parent) flags |= kOtherParentFlag;
    out.push_back(flags);
    if (e.self_parent) put_digest(out, *e.self_parent);
    if (e.other_parent) put_digest(out, *e.other_parent);
    return out;
}

Bytes encode(const Event& e)
{
    Bytes out = signing_bytes(e);
    put_digest(out, e.signature);
    return out;
}

Event decode(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    if (r.u8() != kEncodingVersion) throw DecodeError("unsupported encoding version");
    Event e;
    e.creator = r.u32();
    e.timestamp = static_cast<std::int64_t>(r.u64());
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t len = r.u32();
        e.transactions.push_back(r.blob(len));
    }
    const std::uint8_t flags = r.u8();
    if ((flags & ~(kSelfParentFlag | kOtherParentFlag)) != 0) throw DecodeError("unknown parent flags");
    if ((flags & kSelfParentFlag) != 0) e.self_parent = r.digest<DigestTag>();
    if ((flags & kOtherParentFlag) != 0) e.other_parent = r.digest<DigestTag>();
    e.signature = r.digest<SignatureTag>();
    if (!r.done()) throw DecodeError("trailing bytes after event");
    return e;
}

EventId event_id(const Event& e)
{
    return hash_bytes(encode(e));
}

Event signed_event(Event e, const KeyPair& key)
{
    e.signature = sign(key, signing_bytes(e));
    return e;
}

}  // namespace hashgraph
