//! Embeds a comment, retrieves the top-3 knowledge passages, builds the
//! prompt and tags sentiment and stress, with and without retrieval.
//!
//! cargo run -p triad-core --example retrieval -- "i feel so alone in module 3"

use triad_core::textpipe::TextPipeline;

fn main() -> triad_core::Result<()> {
    let comment = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "i'm still lost in module 3 quizzes and nobody in my group replies".into());
    let mut tp = TextPipeline::reference()?;
    let a = tp.analyze(&comment)?;
    println!("comment: {comment}\n");
    for h in &a.retrieval.hits {
        println!("{:.3}  {} ({})", h.similarity, h.passage.title, h.passage.source.label());
    }
    println!("\nprompt ({} tokens):\n{}\n", a.prompt.token_count, a.prompt.render());
    println!("with retrieval:    {:?} / {:?}", a.affect.sentiment, a.affect.stress);
    tp.use_retrieval = false;
    let b = tp.analyze(&comment)?;
    println!("without retrieval: {:?} / {:?}", b.affect.sentiment, b.affect.stress);
    Ok(())
}
