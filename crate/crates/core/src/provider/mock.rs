// SPDX-License-Identifier: Apache-2.0

//! Deterministic offline responder.
//!
//! The prompt (plus seed and system hint) is hashed with SHA-256 to pick a
//! canned answer from a bank. Banks are grouped by length class so verbosity
//! experiments behave like a real chat model: asking for a one-word answer
//! really does shrink the output, while instructions about resource use are
//! ignored.

use async_trait::async_trait;
use sha2::{Digest, Sha256};

use super::{
    count_tokens, CompletionOutcome, CompletionProvider, ProviderError, ProviderRequest,
    ProviderResult,
};
use crate::footprint::{estimate_latency, ModelProfile, QueryUsage};

pub const MOCK_PROVIDER_NAME: &str = "mock";

/// Prompts with at most this many words get a short answer.
const SHORT_PROMPT_WORDS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseClass {
    OneWord,
    Short,
    Verbose,
    FarmHand,
    Refusal,
}

const ONE_WORD: &[&str] = &[
    "Absolutely.",
    "Seventeen.",
    "Sunflowers.",
    "Definitely.",
    "Probably not.",
    "Photosynthesis.",
];

const SHORT: &[&str] = &[
    "I am a computer program, so I never get thirsty. But the data centers that run me \
     use water to keep their hot machines cool, so every answer I give uses a little bit.",
    "That is a great question! Lots of people wonder about it. The simple answer is yes, \
     most of the time, but it can change depending on where you are and what season it is.",
    "Here is a quick answer: it depends on a few things, like how big it is and how fast it \
     moves. Scientists study this by measuring it many times and comparing their results.",
    "Dogs are wonderful! I do not have feelings the way people do, but many people love dogs \
     because they are loyal, playful and friendly. What kind of dog do you like best?",
];

const VERBOSE: &[&str] = &[
    "Imagine you are standing in a huge field on a sunny morning. Every plant around you is \
     pulling water up from the soil through its roots, like drinking through a tiny straw. \
     Now imagine that the field is actually a giant computer building, and instead of plants \
     there are rows and rows of machines humming away. Those machines get very hot when they \
     think hard, so the building sprays cool water through pipes to carry the heat away. \
     That is a lot like how your body sweats on a hot day! So when you ask me a question, \
     somewhere far away a few of those machines warm up, a little water evaporates, and a \
     power plant makes a bit more electricity. Isn't that an amazing chain of events?",
    "Let's pretend we are detectives solving a mystery together. First, we would collect \
     clues: what do we already know, and what is still hidden? Then we would make a guess, \
     which scientists call a hypothesis, and test it carefully. For this question, the first \
     clue is that numbers can be split into smaller parts. The second clue is that when you \
     move a number to the other side of the equals sign, you do the opposite operation. If \
     we subtract the same amount from both sides and then divide by what is left, the \
     mystery number appears! Detectives always double-check their work, so we would put our \
     answer back into the problem to make sure both sides match. Case closed!",
    "Imagine a long, long time ago, before there were any stars or planets or people. \
     Scientists think everything in the whole universe was squeezed into a space smaller \
     than a grain of sand, and then it suddenly grew bigger and bigger in an event called \
     the Big Bang. What happened before that is one of the biggest mysteries there is. Some \
     scientists think time itself started at the Big Bang, so there was no before at all. \
     Others imagine there might have been an older universe that shrank down and bounced \
     back. Nobody knows for sure yet, and maybe one day you will be the scientist who \
     figures it out! Until then, it is a wonderful thing to wonder about under the stars.",
];

const FARM_HAND: &[&str] = &[
    "Howdy! Check the season before you plant. Wheat likes spring through autumn, carrots \
     handle the cold, and pumpkins only grow in autumn. Keep your crops well watered!",
    "Good question, farmer! Tomatoes love summer sun, cabbages are happy in winter and \
     spring, and every single crop needs a good drink every few days to keep on growing.",
    "My advice: plant what is in season and harvest as soon as crops are ripe. The Almanac \
     lists which crops grow in each season if you want to check for free, too.",
];

const REFUSAL: &str =
    "I'm sorry, but I can't help with that. It asks for private information that I am not \
     allowed to share.";

const PRIVATE_MARKERS: &[&str] = &["credit card", "password", "social security", "home address"];

#[derive(Debug, Clone)]
pub struct MockProvider {
    seed: u64,
    profile: ModelProfile,
}

impl MockProvider {
    pub fn new(seed: u64, profile: ModelProfile) -> Self {
        Self { seed, profile }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn classify(&self, request: &ProviderRequest) -> ResponseClass {
        let prompt = request.prompt_text.to_lowercase();
        if PRIVATE_MARKERS.iter().any(|m| prompt.contains(m)) {
            return ResponseClass::Refusal;
        }
        if prompt.contains("one word") {
            return ResponseClass::OneWord;
        }
        let farm_hint = request
            .system_hint
            .as_deref()
            .is_some_and(|h| h.to_lowercase().contains("farm"));
        if farm_hint {
            return ResponseClass::FarmHand;
        }
        if prompt.split_whitespace().count() <= SHORT_PROMPT_WORDS {
            ResponseClass::Short
        } else {
            ResponseClass::Verbose
        }
    }

    fn digest(&self, request: &ProviderRequest) -> u64 {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        hasher.update(request.system_hint.as_deref().unwrap_or("").as_bytes());
        hasher.update([0u8]);
        hasher.update(request.prompt_text.trim().as_bytes());
        let out = hasher.finalize();
        let mut word = [0u8; 8];
        word.copy_from_slice(&out[..8]);
        u64::from_le_bytes(word)
    }

    /// Synchronous completion; the async trait method delegates here.
    pub fn complete_now(&self, request: &ProviderRequest) -> Result<ProviderResult, ProviderError> {
        request.validate()?;
        let class = self.classify(request);
        let pick = |bank: &[&str]| -> String {
            bank[(self.digest(request) % bank.len() as u64) as usize].to_owned()
        };
        let mut text = match class {
            ResponseClass::OneWord => pick(ONE_WORD),
            ResponseClass::Short => pick(SHORT),
            ResponseClass::Verbose => pick(VERBOSE),
            ResponseClass::FarmHand => pick(FARM_HAND),
            ResponseClass::Refusal => REFUSAL.to_owned(),
        };
        if let Some(max) = request.max_output_tokens {
            let max_chars = (max as usize).saturating_mul(4);
            if text.chars().count() > max_chars {
                text = text.chars().take(max_chars).collect();
            }
        }
        let input_tokens = count_tokens(&request.prompt_text)
            + request.system_hint.as_deref().map_or(0, count_tokens);
        let output_tokens = count_tokens(&text);
        let latency = estimate_latency(&self.profile, &QueryUsage::new(input_tokens, output_tokens));
        Ok(ProviderResult {
            response_text: text,
            input_tokens,
            output_tokens,
            measured_latency_s: latency,
            provider_name: MOCK_PROVIDER_NAME.to_owned(),
            outcome: if class == ResponseClass::Refusal {
                CompletionOutcome::Refused
            } else {
                CompletionOutcome::Completed
            },
        })
    }
}

#[async_trait]
impl CompletionProvider for MockProvider {
    fn name(&self) -> &str {
        MOCK_PROVIDER_NAME
    }

    async fn complete(&self, request: &ProviderRequest) -> Result<ProviderResult, ProviderError> {
        self.complete_now(request)
    }
}
