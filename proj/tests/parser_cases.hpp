#pragma once

#include <string>
#include <vector>

namespace cases {

// Malformed rollouts that must never yield an index sequence.
inline const std::vector<std::string> kAdversarialRollouts = {
    "2, 3, 1, 4, 6, 5",
    "<answer>2, 3, 1</answer>",
    "<thinking>x</thinking>",
    "<thinking>x</thinking><answer>2, 3, 1",
    "<thinking>x<answer>2, 3, 1</answer>",
    "<answer>2, 3, 1</answer><thinking>x</thinking>",
    "<thinking>x</thinking><answer>1</answer><answer>2</answer>",
    "<thinking>a</thinking><thinking>b</thinking><answer>1</answer>",
    "Sure! <thinking>x</thinking><answer>1, 2</answer>",
    "<thinking>x</thinking><answer>1, 2</answer> Hope this helps.",
    "<thinking>x</thinking>so the answer is<answer>1, 2</answer>",
    "<think>x</thinking><answer>1, 2</answer>",
    "<think>a</think><thinking>b</thinking><answer>1, 2</answer>",
    "<thinking>x</thinking><answer>[1, 2, 3]</answer>",
    "<thinking>x</thinking><answer>1 2 3</answer>",
    "<thinking>x</thinking><answer>1; 2; 3</answer>",
    "<thinking>x</thinking><answer>one, two</answer>",
    "<thinking>x</thinking><answer>1, 2,</answer>",
    "<thinking>x</thinking><answer>1.5, 2</answer>",
    "<THINKING>x</THINKING><ANSWER>1, 2</ANSWER>",
};

}  // namespace cases
