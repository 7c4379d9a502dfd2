// Copyright 2026 The aecns Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "aecns/wav_io.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "aecns/error.h"

namespace aecns {
namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t ReadU16(const uint8_t* p) { return uint16_t(p[0] | p[1] << 8); }

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("wav: cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& why) {
    throw DataError("wav: " + path + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const size_t size = ReadU32(chunk + 4);
    const size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) fail("truncated fmt chunk");
      format = ReadU16(bytes.data() + body);
      channels = ReadU16(bytes.data() + body + 2);
      rate = ReadU32(bytes.data() + body + 4);
      bits = ReadU16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = ReadU16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min(size, bytes.size() - body);
    }
    pos = body + size + (size & 1);
  }
  if (format == 0) fail("missing fmt chunk");
  if (data == nullptr) fail("missing data chunk");
  if (channels != 1) fail("expected mono, got " + std::to_string(channels) + " channels");
  if (rate != kSampleRate) fail("expected 16000 Hz, got " + std::to_string(rate));

  std::vector<double> samples;
  if (format == kFormatPcm && bits == 16) {
    samples.resize(data_size / 2);
    for (size_t i = 0; i < samples.size(); ++i) {
      const auto v = static_cast<int16_t>(ReadU16(data + 2 * i));
      samples[i] = v / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    samples.resize(data_size / 4);
    for (size_t i = 0; i < samples.size(); ++i) {
      const uint32_t raw = ReadU32(data + 4 * i);
      float f;
      std::memcpy(&f, &raw, sizeof f);
      samples[i] = f;
    }
  } else {
    fail("unsupported sample format " + std::to_string(format) + "/" +
         std::to_string(bits) + " bit");
  }
  RequireFinite(samples, ("wav " + path).c_str());
  return Waveform(std::move(samples), static_cast<int>(rate));
}

void WriteWav(const std::string& path, const Waveform& wav) {
  const uint32_t data_bytes = static_cast<uint32_t>(wav.size() * 4);
  std::vector<uint8_t> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, kFormatFloat);
  PutU16(out, 1);
  PutU32(out, static_cast<uint32_t>(wav.sample_rate));
  PutU32(out, static_cast<uint32_t>(wav.sample_rate) * 4);
  PutU16(out, 4);
  PutU16(out, 32);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  for (double s : wav.samples) {
    const float f = static_cast<float>(s);
    uint32_t raw;
    std::memcpy(&raw, &f, sizeof raw);
    PutU32(out, raw);
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("wav: cannot write " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("wav: write failed for " + path);
}

}  // namespace aecns
