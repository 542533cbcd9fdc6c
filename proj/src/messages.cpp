#include "hkrt/messages.hpp"

#include "hkrt/codec.hpp"
#include "hkrt/hash.hpp"

namespace hkrt::protocol {

namespace {

constexpr std::string_view kOkTag = "HKRT-OK";
constexpr std::size_t kMaxEmbeddedBytes = 1U << 26;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void write_ok_fields(ByteWriter& w, const OkResponse& ok) {
    w.raw(ok.pseudonym.id).u64(ok.epoch).u32(ok.rsu_id).blob(ok.rsu_signature.bytes);
}

OkResponse read_ok_fields(ByteReader& r) {
    OkResponse ok;
    ok.pseudonym = Pseudonym::from_bytes(r.raw(32));
    ok.epoch = r.u64();
    ok.rsu_id = r.u32();
    ok.rsu_signature.bytes = r.blob(codec::kMaxSignatureBytes);
    return ok;
}

tree::RevocationProof read_embedded_proof(ByteReader& r) { return codec::decode_proof(r.blob(kMaxEmbeddedBytes)); }

} // namespace

Pseudonym rsu_identity(RsuId id) {
    return Pseudonym::from_bytes(sha3_256(ByteWriter().tag("hkrt/rsu").u32(id).bytes()));
}

Bytes OkResponse::signed_message() const {
    return ByteWriter().tag(kOkTag).raw(pseudonym.id).u64(epoch).u32(rsu_id).take();
}

bool OkResponse::verify(ByteView ttp_master_public) const noexcept {
    try {
        return crypto::verify(ttp_master_public, rsu_identity(rsu_id), signed_message(), rsu_signature);
    } catch (...) {
        return false;
    }
}

OkResponse make_ok(const crypto::PseudonymPrivateKey& rsu_key, RsuId rsu_id, const Pseudonym& p,
                   std::uint64_t epoch) {
    OkResponse ok{p, epoch, rsu_id, {}};
    ok.rsu_signature = crypto::sign(rsu_key, ok.signed_message());
    return ok;
}

std::uint64_t FrequencyReport::total() const noexcept {
    std::uint64_t sum = 0;
    for (const auto& [p, c] : counters) sum += c;
    return sum;
}

std::uint8_t message_tag(const Message& m) noexcept { return static_cast<std::uint8_t>(m.index() + 1); }

Bytes encode_message(const Message& m) {
    ByteWriter w;
    w.u8(message_tag(m));
    std::visit(Overloaded{
                   [&](const Query& q) { w.raw(q.pseudonym.id); },
                   [&](const ProofResponse& p) { w.blob(codec::encode_proof(p.proof)); },
                   [&](const OkResponse& ok) { write_ok_fields(w, ok); },
                   [&](const Impeachment& imp) {
                       write_ok_fields(w, imp.ok);
                       w.blob(codec::encode_proof(imp.contradiction));
                   },
                   [&](const TreeUpdate& u) { w.blob(u.snapshot); },
                   [&](const FrequencyReport& rep) {
                       std::uint32_t nonzero = 0;
                       for (const auto& [p, c] : rep.counters) nonzero += c != 0;
                       w.u64(rep.epoch).u32(nonzero);
                       for (const auto& [p, c] : rep.counters) {
                           if (c != 0) w.raw(p.id).u64(c);
                       }
                   },
                   [&](const RsuRevocationNotice& n) { w.u32(n.rsu_id).u64(n.epoch); },
               },
               m);
    return w.take();
}

Message decode_message(ByteView bytes) {
    ByteReader r(bytes);
    const auto tag = r.u8();
    Message out;
    switch (tag) {
        case 0x01:
            out = Query{Pseudonym::from_bytes(r.raw(32))};
            break;
        case 0x02:
            out = ProofResponse{read_embedded_proof(r)};
            break;
        case 0x03:
            out = read_ok_fields(r);
            break;
        case 0x04: {
            Impeachment imp;
            imp.ok = read_ok_fields(r);
            imp.contradiction = read_embedded_proof(r);
            out = std::move(imp);
            break;
        }
        case 0x05:
            out = TreeUpdate{r.blob(kMaxEmbeddedBytes)};
            break;
        case 0x06: {
            FrequencyReport rep;
            rep.epoch = r.u64();
            const auto count = r.u32();
            if (count > r.remaining() / 40) {
                throw Error(Errc::Truncated, "report shorter than entry count");
            }
            Pseudonym prev;
            for (std::uint32_t i = 0; i < count; ++i) {
                const auto p = Pseudonym::from_bytes(r.raw(32));
                const auto c = r.u64();
                if ((i > 0 && !(prev < p)) || c == 0) {
                    throw Error(Errc::NonCanonical, "report entries must be ascending with nonzero counts");
                }
                rep.counters.emplace(p, c);
                prev = p;
            }
            out = std::move(rep);
            break;
        }
        case 0x07: {
            RsuRevocationNotice n;
            n.rsu_id = r.u32();
            n.epoch = r.u64();
            out = n;
            break;
        }
        default:
            throw Error(Errc::BadMagic, "unknown message tag " + std::to_string(tag));
    }
    r.finish();
    return out;
}

} // namespace hkrt::protocol
