// libav*-backed decoder for ordinary container formats (mp4, mkv, webm, ...).

#include <algorithm>
#include <cmath>
#include <memory>

#include "omnijigsaw/error.hpp"
#include "omnijigsaw/media.hpp"

extern "C" {
#include <libavcodec/avcodec.h>
#include <libavformat/avformat.h>
#include <libavutil/channel_layout.h>
#include <libavutil/imgutils.h>
#include <libavutil/opt.h>
#include <libswresample/swresample.h>
#include <libswscale/swscale.h>
}

namespace omnijigsaw {
namespace {

struct FormatCloser {
  void operator()(AVFormatContext* ctx) const { avformat_close_input(&ctx); }
};
struct CodecCloser {
  void operator()(AVCodecContext* ctx) const { avcodec_free_context(&ctx); }
};
struct FrameFree {
  void operator()(AVFrame* f) const { av_frame_free(&f); }
};
struct PacketFree {
  void operator()(AVPacket* p) const { av_packet_free(&p); }
};
struct SwsFree {
  void operator()(SwsContext* s) const { sws_freeContext(s); }
};
struct SwrFree {
  void operator()(SwrContext* s) const { swr_free(&s); }
};

using FormatPtr = std::unique_ptr<AVFormatContext, FormatCloser>;
using CodecPtr = std::unique_ptr<AVCodecContext, CodecCloser>;

FormatPtr open_input(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::Unreadable, "cannot open " + path.string());
  AVFormatContext* raw = nullptr;
  if (avformat_open_input(&raw, path.c_str(), nullptr, nullptr) < 0)
    throw Error(ErrorCode::NotMedia, "libavformat cannot open " + path.string());
  FormatPtr ctx(raw);
  if (avformat_find_stream_info(ctx.get(), nullptr) < 0)
    throw Error(ErrorCode::NotMedia, "no stream info in " + path.string());
  return ctx;
}

CodecPtr open_codec(AVStream* stream) {
  const AVCodec* codec = avcodec_find_decoder(stream->codecpar->codec_id);
  if (!codec) return nullptr;
  CodecPtr ctx(avcodec_alloc_context3(codec));
  if (!ctx || avcodec_parameters_to_context(ctx.get(), stream->codecpar) < 0) return nullptr;
  if (avcodec_open2(ctx.get(), codec, nullptr) < 0) return nullptr;
  return ctx;
}

double stream_seconds(const AVStream* s, std::int64_t ts) {
  const std::int64_t start = s->start_time == AV_NOPTS_VALUE ? 0 : s->start_time;
  return static_cast<double>(ts - start) * av_q2d(s->time_base);
}

class FfmpegDecoder final : public MediaDecoder {
 public:
  bool handles(const std::filesystem::path& path) const override {
    return path.extension() != kRawMediaExtension;
  }

  MediaMeta probe(const std::filesystem::path& path) const override {
    auto ctx = open_input(path);
    MediaMeta m;
    if (ctx->duration != AV_NOPTS_VALUE) m.duration_s = static_cast<double>(ctx->duration) / AV_TIME_BASE;
    const int v = av_find_best_stream(ctx.get(), AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
    const int a = av_find_best_stream(ctx.get(), AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0);
    if (v >= 0) {
      const auto* par = ctx->streams[v]->codecpar;
      m.has_video = par->width > 0 && par->height > 0;
      m.width = par->width;
      m.height = par->height;
      m.n_frames = static_cast<std::size_t>(std::max<std::int64_t>(0, ctx->streams[v]->nb_frames));
    }
    if (a >= 0) {
      m.has_audio = true;
      m.source_sample_rate_hz = ctx->streams[a]->codecpar->sample_rate;
    }
    return m;
  }

  OmniSample decode(const std::filesystem::path& path, const DecodeOptions& options) const override {
    auto ctx = open_input(path);
    OmniSample s;
    s.id = path.stem().string();
    s.source_path = path.string();
    if (ctx->duration != AV_NOPTS_VALUE) s.duration_s = static_cast<double>(ctx->duration) / AV_TIME_BASE;

    const int vi = av_find_best_stream(ctx.get(), AVMEDIA_TYPE_VIDEO, -1, -1, nullptr, 0);
    const int ai = av_find_best_stream(ctx.get(), AVMEDIA_TYPE_AUDIO, -1, -1, nullptr, 0);
    CodecPtr vdec = vi >= 0 ? open_codec(ctx->streams[vi]) : nullptr;
    CodecPtr adec = ai >= 0 ? open_codec(ctx->streams[ai]) : nullptr;
    s.has_video = vdec != nullptr;
    s.has_audio = adec != nullptr;

    std::unique_ptr<SwrContext, SwrFree> swr;
    if (adec) {
      s.audio.sample_rate_hz = adec->sample_rate;
      const std::int64_t in_layout = adec->channel_layout ? static_cast<std::int64_t>(adec->channel_layout)
                                                         : av_get_default_channel_layout(adec->channels);
      swr.reset(swr_alloc_set_opts(nullptr, AV_CH_LAYOUT_MONO, AV_SAMPLE_FMT_FLT, adec->sample_rate, in_layout,
                                   adec->sample_fmt, adec->sample_rate, 0, nullptr));
      if (!swr || swr_init(swr.get()) < 0) throw Error(ErrorCode::NotMedia, "cannot init resampler for " + path.string());
    }

    std::unique_ptr<SwsContext, SwsFree> sws;
    int out_w = 0;
    int out_h = 0;
    double next_keep = -1e300;
    const double keep_step = options.max_fps > 0.0 ? 1.0 / options.max_fps : 0.0;

    std::unique_ptr<AVPacket, PacketFree> pkt(av_packet_alloc());
    std::unique_ptr<AVFrame, FrameFree> frame(av_frame_alloc());

    const auto take_video = [&](AVFrame* f) {
      const std::int64_t pts = f->best_effort_timestamp;
      if (pts == AV_NOPTS_VALUE) return;
      const double t = stream_seconds(ctx->streams[vi], pts);
      if (!s.video.empty() && t <= s.video.back().timestamp_s) return;
      if (t + 1e-9 < next_keep) return;
      next_keep = t + keep_step;
      if (!sws) {
        out_w = f->width;
        out_h = f->height;
        const auto px = static_cast<std::size_t>(out_w) * out_h;
        if (options.max_pixels > 0 && px > options.max_pixels) {
          const double scale = std::sqrt(static_cast<double>(options.max_pixels) / static_cast<double>(px));
          out_w = std::max(2, static_cast<int>(std::floor(out_w * scale)));
          out_h = std::max(2, static_cast<int>(std::floor(out_h * scale)));
        }
        sws.reset(sws_getContext(f->width, f->height, static_cast<AVPixelFormat>(f->format), out_w, out_h,
                                 AV_PIX_FMT_RGB24, SWS_BILINEAR, nullptr, nullptr, nullptr));
        if (!sws) throw Error(ErrorCode::NotMedia, "cannot init scaler for " + path.string());
      }
      Frame out;
      out.width = out_w;
      out.height = out_h;
      out.timestamp_s = t;
      out.rgb.resize(static_cast<std::size_t>(out_w) * out_h * 3);
      std::uint8_t* dst[1] = {out.rgb.data()};
      const int dst_stride[1] = {out_w * 3};
      sws_scale(sws.get(), f->data, f->linesize, 0, f->height, dst, dst_stride);
      s.video.push_back(std::move(out));
    };

    const auto take_audio = [&](AVFrame* f) {
      std::vector<float> buf(static_cast<std::size_t>(f->nb_samples) + 256);
      std::uint8_t* out[1] = {reinterpret_cast<std::uint8_t*>(buf.data())};
      const int got = swr_convert(swr.get(), out, static_cast<int>(buf.size()),
                                  const_cast<const std::uint8_t**>(f->extended_data), f->nb_samples);
      if (got > 0) s.audio.samples.insert(s.audio.samples.end(), buf.begin(), buf.begin() + got);
    };

    const auto drain = [&](AVCodecContext* dec, bool video) {
      while (avcodec_receive_frame(dec, frame.get()) == 0) {
        if (video) take_video(frame.get());
        else take_audio(frame.get());
        av_frame_unref(frame.get());
      }
    };

    while (av_read_frame(ctx.get(), pkt.get()) >= 0) {
      if (vdec && pkt->stream_index == vi) {
        if (avcodec_send_packet(vdec.get(), pkt.get()) >= 0) drain(vdec.get(), true);
      } else if (adec && pkt->stream_index == ai) {
        if (avcodec_send_packet(adec.get(), pkt.get()) >= 0) drain(adec.get(), false);
      }
      av_packet_unref(pkt.get());
    }
    if (vdec) {
      avcodec_send_packet(vdec.get(), nullptr);
      drain(vdec.get(), true);
    }
    if (adec) {
      avcodec_send_packet(adec.get(), nullptr);
      drain(adec.get(), false);
    }

    s.has_video = s.has_video && !s.video.empty();
    s.has_audio = s.has_audio && !s.audio.samples.empty();
    if (s.duration_s <= 0.0) {
      s.duration_s = std::max(s.has_audio ? s.audio.duration_s() : 0.0,
                              s.has_video ? s.video.back().timestamp_s : 0.0);
    }
    return s;
  }
};

}  // namespace

std::unique_ptr<MediaDecoder> make_ffmpeg_decoder() { return std::make_unique<FfmpegDecoder>(); }

}  // namespace omnijigsaw
