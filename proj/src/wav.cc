// Copyright 2026 The carsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "carsynth/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "carsynth/error.h"

namespace carsynth {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t ReadU32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t ReadU16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool TagIs(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::int32_t Quantize(double v, int bits) {
  const double scale = std::ldexp(1.0, bits - 1);
  const double q = std::nearbyint(v * scale);
  const double lo = -scale;
  const double hi = scale - 1.0;
  return static_cast<std::int32_t>(std::clamp(q, lo, hi));
}

}  // namespace

AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !TagIs(bytes, 0, "RIFF") || !TagIs(bytes, 8, "WAVE")) {
    throw IoError("not a RIFF/WAVE stream");
  }
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = ReadU32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    // Truncated final data chunks are tolerated; anything else must fit.
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (TagIs(bytes, pos, "fmt ")) {
      if (avail < 16) throw IoError("fmt chunk too short");
      format = ReadU16(bytes, body);
      channels = ReadU16(bytes, body + 2);
      rate = ReadU32(bytes, body + 4);
      block_align = ReadU16(bytes, body + 12);
      bits = ReadU16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (avail < 40) throw IoError("extensible fmt chunk too short");
        format = ReadU16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (TagIs(bytes, pos, "data")) {
      data = bytes.subspan(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw IoError("missing fmt chunk");
  if (!have_data) throw IoError("missing data chunk");
  if (channels == 0 || rate == 0) throw IoError("invalid channel count or rate");

  const int bytes_per_sample = bits / 8;
  const bool is_int = format == kFormatPcm &&
                      (bits == 16 || bits == 24 || bits == 32);
  const bool is_float = format == kFormatFloat && (bits == 32 || bits == 64);
  if (!is_int && !is_float) {
    throw IoError("unsupported sample format (format " +
                  std::to_string(format) + ", " + std::to_string(bits) +
                  " bits)");
  }
  if (block_align != channels * bytes_per_sample) {
    throw IoError("inconsistent block alignment");
  }

  const std::size_t frames = data.size() / block_align;
  AudioBuffer out(channels, frames, static_cast<int>(rate));
  const double int_scale = std::ldexp(1.0, -(bits - 1));
  for (std::size_t f = 0; f < frames; ++f) {
    for (int c = 0; c < channels; ++c) {
      const std::uint8_t* p = data.data() + f * block_align + c * bytes_per_sample;
      double v = 0.0;
      if (is_int) {
        std::int32_t s = 0;
        if (bits == 16) {
          s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        } else if (bits == 24) {
          std::uint32_t u = p[0] | (p[1] << 8) | (p[2] << 16);
          if (u & 0x800000u) u |= 0xFF000000u;
          s = static_cast<std::int32_t>(u);
        } else {
          s = static_cast<std::int32_t>(ReadU32(std::span(p, 4), 0));
        }
        v = s * int_scale;
      } else if (bits == 32) {
        float x;
        std::uint32_t u = ReadU32(std::span(p, 4), 0);
        std::memcpy(&x, &u, 4);
        v = x;
      } else {
        std::uint64_t u = 0;
        for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        std::memcpy(&v, &u, 8);
      }
      if (!std::isfinite(v)) throw IoError("non-finite sample in WAV data");
      out.channel(c)[f] = v;
    }
  }
  return out;
}

std::vector<std::uint8_t> EncodeWav(const AudioBuffer& buf, SampleFormat format) {
  if (buf.channel_count() < 1) throw InvalidArgument("cannot encode empty buffer");
  const int bits = format == SampleFormat::kPcm16 ? 16 : (format == SampleFormat::kPcm24 ? 24 : 32);
  const int bytes_per_sample = bits / 8;
  const std::uint16_t channels = static_cast<std::uint16_t>(buf.channel_count());
  const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bytes_per_sample);
  const std::uint64_t data_size = static_cast<std::uint64_t>(block_align) * buf.frames();
  if (data_size + 36 > 0xFFFFFFFFull) throw InvalidArgument("WAV payload exceeds 4 GiB");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size + 1);
  PutTag(out, "RIFF");
  PutU32(out, static_cast<std::uint32_t>(36 + data_size + (data_size & 1)));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, format == SampleFormat::kFloat32 ? kFormatFloat : kFormatPcm);
  PutU16(out, channels);
  PutU32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  PutU32(out, static_cast<std::uint32_t>(buf.sample_rate()) * block_align);
  PutU16(out, block_align);
  PutU16(out, static_cast<std::uint16_t>(bits));
  PutTag(out, "data");
  PutU32(out, static_cast<std::uint32_t>(data_size));

  for (std::size_t f = 0; f < buf.frames(); ++f) {
    for (int c = 0; c < channels; ++c) {
      const double v = buf.channel(c)[f];
      if (format == SampleFormat::kFloat32) {
        const float x = static_cast<float>(v);
        std::uint32_t u;
        std::memcpy(&u, &x, 4);
        PutU32(out, u);
      } else {
        const std::uint32_t u = static_cast<std::uint32_t>(Quantize(v, bits));
        for (int i = 0; i < bytes_per_sample; ++i) {
          out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
        }
      }
    }
  }
  if (data_size & 1) out.push_back(0);
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

AudioBuffer ReadWav(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeWav(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void WriteWav(const std::filesystem::path& path, const AudioBuffer& buf,
              SampleFormat format) {
  WriteFileBytes(path, EncodeWav(buf, format));
}

}  // namespace carsynth
