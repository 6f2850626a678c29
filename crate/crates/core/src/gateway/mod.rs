//! Prompt construction and multi-path sampling against a chat endpoint.

mod sample;
mod template;
mod transport;

pub use sample::{sample_paths, SampleError, SampleOutcome, SamplingConfig};
pub use template::{
    render_prompt, substitute, ChatMessage, Exemplar, FrameTemplate, PromptTemplate, Role,
    TemplateError, DECOMPOSE_TEMPLATE, FACT_CHECK_TEMPLATE, JUDGE_PLACEHOLDERS, JUDGE_TEMPLATE,
};
pub use transport::{
    ChatProvider, ChatRequest, ChatResponse, HttpChat, ReplayEntry, ReplayTransport, WILDCARD_KEY,
};
