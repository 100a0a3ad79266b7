#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dapac/protocol.hpp"

namespace dapac::wire {

inline constexpr uint8_t PROTOCOL_VERSION = 1;

enum Tag : uint8_t {
    VERIFY_REQ = 0x01,
    VERIFY_OK = 0x02,
    VERIFY_FAIL = 0x03,
    ATTR_RELAY = 0x04,
    QUERY = 0x05,
    ANSWER = 0x06,
    ERROR = 0x07,
};

/// Frame layout: u32 big-endian length (tag + payload bytes), u8 tag, payload.
struct Frame {
    uint8_t tag = 0;
    std::vector<uint8_t> payload;

    bool operator==(const Frame&) const = default;
};

std::vector<uint8_t> encode_frame(const Frame& f);
/// Throws FrameError on truncation or length mismatch.
Frame decode_frame(std::span<const uint8_t> bytes);

/// VERIFY_REQ: version byte, user id, asserted (position, value) pairs.
struct VerifyRequest {
    uint8_t version = PROTOCOL_VERSION;
    std::string user;
    std::vector<std::pair<uint16_t, uint16_t>> asserted; // 1-based position, 0-based value

    bool operator==(const VerifyRequest&) const = default;
};

std::vector<uint8_t> encode_verify_request(const VerifyRequest& r);
VerifyRequest decode_verify_request(std::span<const uint8_t> payload); // VersionError on mismatch

/// ATTR_RELAY payload: verified tail (position, value) pairs.
std::vector<uint8_t> encode_relay(const std::vector<std::pair<uint16_t, uint16_t>>& tail);
std::vector<std::pair<uint16_t, uint16_t>> decode_relay(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_query(const ServerQuery& q);
ServerQuery decode_query(std::span<const uint8_t> payload, const SystemConfig& cfg);

std::vector<uint8_t> encode_answer(const ServerAnswer& a);
ServerAnswer decode_answer(std::span<const uint8_t> payload, FieldPrime q);

std::vector<uint8_t> encode_error(uint32_t code, const std::string& message);
std::pair<uint32_t, std::string> decode_error(std::span<const uint8_t> payload);

std::vector<uint8_t> encode_outcome(const VerificationOutcome& o);
VerificationOutcome decode_outcome(std::span<const uint8_t> payload);

/// Self-contained binary transcript blob (file artifact, not a frame).
std::vector<uint8_t> encode_transcript(const Transcript& t);
Transcript decode_transcript(std::span<const uint8_t> bytes, const SystemConfig& cfg);

/// Convenience: a complete QUERY / ANSWER / VERIFY frame as raw bytes.
std::vector<uint8_t> query_frame(const ServerQuery& q);
std::vector<uint8_t> answer_frame(const ServerAnswer& a);

} // namespace dapac::wire
