#include "stylerag/embedders/context.hpp"

#include "stylerag/error.hpp"

namespace stylerag::embed {

ContextWindow build_context_window(const Script& script, std::size_t position, std::uint32_t w) {
    if (position >= script.utterances.size()) {
        throw Error(ErrorCode::PositionOutOfRange,
                    "position " + std::to_string(position) + " in script of " +
                        std::to_string(script.utterances.size()) + " utterances");
    }
    if (w < 1) {
        throw Error(ErrorCode::InvalidArgument, "context window size must be >= 1");
    }
    ContextWindow window;
    window.center_index = position;
    window.window_size = w;
    std::size_t first = position > w ? position - w : 0;
    window.utterances.assign(script.utterances.begin() + static_cast<std::ptrdiff_t>(first),
                             script.utterances.begin() + static_cast<std::ptrdiff_t>(position));
    return window;
}

}  // namespace stylerag::embed
