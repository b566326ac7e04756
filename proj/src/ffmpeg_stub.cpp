#include "omnijigsaw/media.hpp"

namespace omnijigsaw {

std::unique_ptr<MediaDecoder> make_ffmpeg_decoder() { return nullptr; }

}  // namespace omnijigsaw
