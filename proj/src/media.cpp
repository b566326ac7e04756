#include "omnijigsaw/media.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/image.hpp"

namespace omnijigsaw {
namespace {

constexpr std::array<char, 8> kMagic = {'O', 'J', 'M', 'E', 'D', 'I', 'A', '1'};
constexpr std::uint32_t kMaxHeaderBytes = 64u << 20;

static_assert(std::endian::native == std::endian::little, "raw media I/O assumes a little-endian host");

struct RawHeader {
  nlohmann::json json;
  std::streamoff payload_offset = 0;
};

RawHeader read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size())) throw Error(ErrorCode::NotMedia, "truncated media file: " + path.string());
  if (magic != kMagic) throw Error(ErrorCode::NotMedia, "bad media magic: " + path.string());
  std::uint32_t len = 0;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof(len)) || len > kMaxHeaderBytes)
    throw Error(ErrorCode::NotMedia, "bad media header length: " + path.string());
  std::string text(len, '\0');
  if (!in.read(text.data(), len)) throw Error(ErrorCode::NotMedia, "truncated media header: " + path.string());
  RawHeader h;
  try {
    h.json = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::NotMedia, "unparseable media header in " + path.string() + ": " + e.what());
  }
  h.payload_offset = static_cast<std::streamoff>(kMagic.size() + sizeof(len) + len);
  return h;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
  return in;
}

MediaMeta meta_from(const nlohmann::json& h, const std::filesystem::path& path) {
  try {
    MediaMeta m;
    m.duration_s = h.at("duration_s").get<double>();
    m.has_video = h.at("has_video").get<bool>();
    m.has_audio = h.at("has_audio").get<bool>();
    m.width = h.value("width", 0);
    m.height = h.value("height", 0);
    m.source_sample_rate_hz = h.value("sample_rate_hz", 0);
    m.n_frames = h.value("n_frames", std::size_t{0});
    if (m.duration_s < 0.0 || (m.has_video && (m.width <= 0 || m.height <= 0)))
      throw Error(ErrorCode::NotMedia, "inconsistent media header: " + path.string());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::NotMedia, "incomplete media header in " + path.string() + ": " + e.what());
  }
}

void apply_options(OmniSample& s, const DecodeOptions& opt) {
  if (opt.max_fps > 0.0 && s.video.size() > 1) {
    std::vector<Frame> kept;
    const double step = 1.0 / opt.max_fps;
    double next = s.video.front().timestamp_s;
    for (auto& f : s.video) {
      if (f.timestamp_s + 1e-9 >= next) {
        next = f.timestamp_s + step;
        kept.push_back(std::move(f));
      }
    }
    s.video = std::move(kept);
  }
  if (opt.max_pixels > 0) {
    for (auto& f : s.video) {
      if (f.pixel_count() <= opt.max_pixels) continue;
      const double scale = std::sqrt(static_cast<double>(opt.max_pixels) / static_cast<double>(f.pixel_count()));
      const int w = std::max(1, static_cast<int>(std::floor(f.width * scale)));
      const int h = std::max(1, static_cast<int>(std::floor(f.height * scale)));
      f = image::resize_bilinear(f, w, h);
    }
  }
}

void write_container(const std::filesystem::path& path, const nlohmann::ordered_json& header,
                     const std::vector<Frame>& frames, std::span<const float> audio, SampleFormat format) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Unreadable, "cannot write " + path.string());
  const std::string text = header.dump();
  const auto len = static_cast<std::uint32_t>(text.size());
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& f : frames) out.write(reinterpret_cast<const char*>(f.rgb.data()), static_cast<std::streamsize>(f.rgb.size()));
  if (format == SampleFormat::S16) {
    std::vector<std::int16_t> pcm(audio.size());
    for (std::size_t i = 0; i < audio.size(); ++i)
      pcm[i] = static_cast<std::int16_t>(std::lround(std::clamp(audio[i], -1.0f, 1.0f) * 32767.0f));
    out.write(reinterpret_cast<const char*>(pcm.data()), static_cast<std::streamsize>(pcm.size() * sizeof(std::int16_t)));
  } else {
    out.write(reinterpret_cast<const char*>(audio.data()), static_cast<std::streamsize>(audio.size() * sizeof(float)));
  }
  if (!out) throw Error(ErrorCode::Unreadable, "short write to " + path.string());
}

}  // namespace

bool RawMediaDecoder::handles(const std::filesystem::path& path) const { return path.extension() == kRawMediaExtension; }

MediaMeta RawMediaDecoder::probe(const std::filesystem::path& path) const {
  auto in = open_for_read(path);
  return meta_from(read_header(in, path).json, path);
}

OmniSample RawMediaDecoder::decode(const std::filesystem::path& path, const DecodeOptions& options) const {
  auto in = open_for_read(path);
  const RawHeader h = read_header(in, path);
  const MediaMeta meta = meta_from(h.json, path);
  OmniSample s;
  s.id = path.stem().string();
  s.source_path = path.string();
  s.duration_s = meta.duration_s;
  s.has_video = meta.has_video;
  s.has_audio = meta.has_audio;
  s.source_tag = h.json.value("source_tag", std::string("default"));
  try {
    if (meta.has_video) {
      const auto ts = h.json.at("frame_timestamps").get<std::vector<double>>();
      if (ts.size() != meta.n_frames) throw Error(ErrorCode::NotMedia, "frame timestamp count mismatch: " + path.string());
      const std::size_t bytes = static_cast<std::size_t>(meta.width) * meta.height * 3;
      s.video.reserve(meta.n_frames);
      for (std::size_t i = 0; i < meta.n_frames; ++i) {
        Frame f;
        f.width = meta.width;
        f.height = meta.height;
        f.timestamp_s = ts[i];
        f.rgb.resize(bytes);
        if (!in.read(reinterpret_cast<char*>(f.rgb.data()), static_cast<std::streamsize>(bytes)))
          throw Error(ErrorCode::NotMedia, "truncated frame payload: " + path.string());
        s.video.push_back(std::move(f));
      }
    }
    if (meta.has_audio) {
      const auto n = h.json.at("n_samples").get<std::size_t>();
      const auto fmt = h.json.value("sample_format", std::string("s16le"));
      s.audio.sample_rate_hz = meta.source_sample_rate_hz;
      s.audio.samples.resize(n);
      if (fmt == "s16le") {
        std::vector<std::int16_t> pcm(n);
        if (!in.read(reinterpret_cast<char*>(pcm.data()), static_cast<std::streamsize>(n * sizeof(std::int16_t))))
          throw Error(ErrorCode::NotMedia, "truncated audio payload: " + path.string());
        for (std::size_t i = 0; i < n; ++i) s.audio.samples[i] = static_cast<float>(pcm[i]) / 32767.0f;
      } else if (fmt == "f32le") {
        if (!in.read(reinterpret_cast<char*>(s.audio.samples.data()), static_cast<std::streamsize>(n * sizeof(float))))
          throw Error(ErrorCode::NotMedia, "truncated audio payload: " + path.string());
      } else {
        throw Error(ErrorCode::NotMedia, "unknown sample format '" + fmt + "': " + path.string());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::NotMedia, "bad media header in " + path.string() + ": " + e.what());
  }
  apply_options(s, options);
  return s;
}

MediaRegistry::MediaRegistry() : ffmpeg_(make_ffmpeg_decoder()) {}

const MediaDecoder& MediaRegistry::pick(const std::filesystem::path& path) const {
  if (raw_.handles(path)) return raw_;
  if (ffmpeg_ && ffmpeg_->handles(path)) return *ffmpeg_;
  throw Error(ErrorCode::NotMedia, "no decoder for " + path.string());
}

bool MediaRegistry::handles(const std::filesystem::path& path) const {
  return raw_.handles(path) || (ffmpeg_ && ffmpeg_->handles(path));
}

MediaMeta MediaRegistry::probe(const std::filesystem::path& path) const { return pick(path).probe(path); }

OmniSample MediaRegistry::decode(const std::filesystem::path& path, const DecodeOptions& options) const {
  return pick(path).decode(path, options);
}

void write_raw_media(const std::filesystem::path& path, const OmniSample& sample, SampleFormat format) {
  nlohmann::ordered_json h;
  h["schema_version"] = kSchemaVersion;
  h["duration_s"] = sample.duration_s;
  h["has_video"] = sample.has_video;
  h["has_audio"] = sample.has_audio;
  const bool video = sample.has_video && !sample.video.empty();
  h["width"] = video ? sample.video.front().width : 0;
  h["height"] = video ? sample.video.front().height : 0;
  h["n_frames"] = video ? sample.video.size() : 0;
  std::vector<double> ts;
  if (video) {
    for (const auto& f : sample.video) {
      if (f.width != sample.video.front().width || f.height != sample.video.front().height)
        throw Error(ErrorCode::InvalidArgument, "all frames of a media file must share dimensions");
      ts.push_back(f.timestamp_s);
    }
  }
  h["frame_timestamps"] = ts;
  h["sample_rate_hz"] = sample.has_audio ? sample.audio.sample_rate_hz : 0;
  h["n_samples"] = sample.has_audio ? sample.audio.samples.size() : 0;
  h["sample_format"] = format == SampleFormat::S16 ? "s16le" : "f32le";
  h["source_tag"] = sample.source_tag;
  static const std::vector<Frame> kNoFrames;
  write_container(path, h, video ? sample.video : kNoFrames,
                  sample.has_audio ? std::span<const float>(sample.audio.samples) : std::span<const float>(), format);
}

void write_clip_media(const std::filesystem::path& path, const Clip& clip, int sample_rate_hz) {
  OmniSample s;
  s.duration_s = clip.duration_s;
  s.has_video = clip.video_present && !clip.frames.empty();
  s.has_audio = clip.audio_present && !clip.audio.empty();
  if (s.has_video) {
    s.video = clip.frames;
    for (auto& f : s.video) f.timestamp_s -= clip.start_s;
  }
  if (s.has_audio) s.audio = Waveform{sample_rate_hz, clip.audio};
  write_raw_media(path, s, SampleFormat::F32);
}

}  // namespace omnijigsaw
