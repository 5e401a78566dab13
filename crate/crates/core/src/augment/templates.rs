//! Slot-filled sentence banks. `{t}` is a course topic, `{u}` a second
//! topic, `{m}` a module number, `{w}` a week number, `{d}` a weekday and
//! `{n}` a small count.
//!
//! Themed sentences carry their stress marker within the first five words,
//! so truncation to the minimum comment length never removes it. Filler
//! sentences avoid every sentiment and stress lexicon word.

pub(super) const TOPICS: &[&str] = &[
    "statistics", "calculus", "anatomy", "accounting", "marketing", "programming",
    "nursing ethics", "organic chemistry", "macroeconomics", "journalism", "animation",
    "agronomy", "equine studies", "social work", "management", "tourism", "design theory",
    "veterinary care", "oral hygiene", "pedagogy", "biology", "databases", "law basics",
    "public health", "linear algebra", "microbiology", "sociology", "graphic design",
];

pub(super) const DAYS: &[&str] = &["monday", "tuesday", "wednesday", "thursday", "friday", "saturday"];

pub(super) const ISOLATION: &[&str] = &[
    "I feel isolated in module {m} and the {t} work feels sad.",
    "Feeling so alone with {t} this term, and it is getting worse.",
    "So lonely studying {t} online, I miss having anyone to talk to.",
    "Nobody in my {t} group replies and I feel ignored and upset.",
    "I am disconnected from the class since week {w} and it feels awful.",
    "Honestly isolated from everyone in {t}, the silence is miserable.",
    "I feel invisible in the {t} forum, nobody answers and it is sad.",
    "Completely alone on the {t} project, no one checks in anymore.",
];

pub(super) const WORKLOAD: &[&str] = &[
    "Completely overwhelmed by {n} deadlines this week and exhausted.",
    "Too many {t} assignments due at once, I am stressed.",
    "I am drowning in {t} readings and labs, this is terrible.",
    "The workload in module {m} is crushing and I am so tired.",
    "No time left to prepare the {t} quiz, I am anxious and behind.",
    "Juggling work and {t} is impossible, I am overwhelmed.",
    "So far behind on {t} that I am anxious every night.",
    "The pressure from {n} overlapping {t} tasks is awful.",
];

pub(super) const CONFUSION: &[&str] = &[
    "I am confused about the {t} notation and feel stupid.",
    "Totally lost in the {t} lectures since week {w}, frustrating.",
    "I dont understand what the {t} assignment asks for, frustrating.",
    "Unclear {t} material again and I am frustrated.",
    "Still confused after rewatching the {t} video twice.",
    "Confusing examples in week {w} {t}, and it is hard.",
    "I am unsure how the {t} marks work, so confused.",
    "Clueless about the {t} lab steps, it is awful.",
];

pub(super) const NEGATIVE: &[&str] = &[
    "The {t} quiz was awful and I am upset about it.",
    "Really disappointed with my {t} mark this week.",
    "This {t} unit is boring and the pace is bad.",
    "I hate how the {t} lab was graded.",
    "Terrible week, the {t} feedback felt unfair.",
    "Angry that the {t} session got cancelled again.",
    "The {t} recordings are bad quality and annoying.",
    "I am sad about how the {t} presentation went.",
];

pub(super) const NEUTRAL: &[&str] = &[
    "Question about the {t} schedule for week {w}.",
    "Is the {t} reading list posted yet for module {m}?",
    "Reminder to check the {t} timetable on {d}.",
    "When is the next {t} session available?",
    "I registered for the {t} tutorial on {d}.",
    "Noted the update on the {t} room change.",
    "Okay, the {t} slides for week {w} are listed now.",
    "I asked about the {t} exam information on {d}.",
];

pub(super) const POSITIVE: &[&str] = &[
    "Really enjoyed the {t} lecture this week.",
    "The {t} tutor was helpful and very clear.",
    "Great {t} session, thanks to everyone involved.",
    "I feel confident about the {t} quiz now.",
    "Loved the {t} group project, very interesting.",
    "Happy with my {t} progress in module {m}.",
    "The {t} videos are excellent and fun to follow.",
    "Glad the {t} examples made it easy this week.",
];

pub(super) const FILLER: &[&str] = &[
    "We covered {t} on {d} and the slides sit on the portal.",
    "My notes for week {w} include {t} examples and {n} exercises.",
    "The {t} chapter has {n} pages and a short summary at the end.",
    "Our group meets on {d} evenings to go over {t}.",
    "The lecturer uploaded the {t} recordings after the live class.",
    "I usually study {t} at the library after my shift.",
    "Module {m} moves from {t} to {u} after the break.",
    "There were {n} of us in the {t} room on {d}.",
    "The {t} lab uses the same kit as last term.",
    "I printed the {u} handout and brought it to the {t} class.",
    "Week {w} pairs {t} with a short piece on {u}.",
    "The {t} tutorial runs in room {n} on {d}.",
    "Most people bring laptops to the {t} workshop.",
    "I read the {u} article before the {t} seminar.",
    "The {t} portfolio collects work from weeks {w} to {n}.",
    "Each {t} worksheet has {n} parts and an answer key.",
    "The course page links {t} resources and {u} readings.",
    "I take the bus on {d} to reach the {t} campus.",
];
