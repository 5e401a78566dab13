// Generated from knowledge_base/manifest.json; keep in sync with the passage files.

pub(super) const MANIFEST: &str = include_str!("../../knowledge_base/manifest.json");

pub(super) const FILES: &[(&str, &str)] = &[
    ("passages/faq-peer-study-groups.txt", include_str!("../../knowledge_base/passages/faq-peer-study-groups.txt")),
    ("passages/faq-quiz-retake.txt", include_str!("../../knowledge_base/passages/faq-quiz-retake.txt")),
    ("passages/faq-resubmission-portal.txt", include_str!("../../knowledge_base/passages/faq-resubmission-portal.txt")),
    ("passages/faq-grade-delay.txt", include_str!("../../knowledge_base/passages/faq-grade-delay.txt")),
    ("passages/faq-lab-access.txt", include_str!("../../knowledge_base/passages/faq-lab-access.txt")),
    ("passages/faq-extension.txt", include_str!("../../knowledge_base/passages/faq-extension.txt")),
    ("passages/faq-workload-planning.txt", include_str!("../../knowledge_base/passages/faq-workload-planning.txt")),
    ("passages/faq-module-navigation.txt", include_str!("../../knowledge_base/passages/faq-module-navigation.txt")),
    ("passages/faq-forum-tags.txt", include_str!("../../knowledge_base/passages/faq-forum-tags.txt")),
    ("passages/faq-technical-support.txt", include_str!("../../knowledge_base/passages/faq-technical-support.txt")),
    ("passages/faq-enrolment-status.txt", include_str!("../../knowledge_base/passages/faq-enrolment-status.txt")),
    ("passages/faq-tuition-payment.txt", include_str!("../../knowledge_base/passages/faq-tuition-payment.txt")),
    ("passages/faq-exam-anxiety.txt", include_str!("../../knowledge_base/passages/faq-exam-anxiety.txt")),
    ("passages/faq-tutor-contact.txt", include_str!("../../knowledge_base/passages/faq-tutor-contact.txt")),
    ("passages/faq-mentorship.txt", include_str!("../../knowledge_base/passages/faq-mentorship.txt")),
    ("passages/faq-withdrawal.txt", include_str!("../../knowledge_base/passages/faq-withdrawal.txt")),
    ("passages/guide-time-management.txt", include_str!("../../knowledge_base/passages/guide-time-management.txt")),
    ("passages/guide-reading-strategies.txt", include_str!("../../knowledge_base/passages/guide-reading-strategies.txt")),
    ("passages/guide-exam-preparation.txt", include_str!("../../knowledge_base/passages/guide-exam-preparation.txt")),
    ("passages/guide-writing-assignments.txt", include_str!("../../knowledge_base/passages/guide-writing-assignments.txt")),
    ("passages/guide-quantitative-modules.txt", include_str!("../../knowledge_base/passages/guide-quantitative-modules.txt")),
    ("passages/guide-online-collaboration.txt", include_str!("../../knowledge_base/passages/guide-online-collaboration.txt")),
    ("passages/guide-motivation.txt", include_str!("../../knowledge_base/passages/guide-motivation.txt")),
    ("passages/guide-lab-reports.txt", include_str!("../../knowledge_base/passages/guide-lab-reports.txt")),
    ("passages/guide-note-taking.txt", include_str!("../../knowledge_base/passages/guide-note-taking.txt")),
    ("passages/forum-isolation-thread.txt", include_str!("../../knowledge_base/passages/forum-isolation-thread.txt")),
    ("passages/forum-workload-thread.txt", include_str!("../../knowledge_base/passages/forum-workload-thread.txt")),
    ("passages/forum-confusion-thread.txt", include_str!("../../knowledge_base/passages/forum-confusion-thread.txt")),
    ("passages/forum-upload-thread.txt", include_str!("../../knowledge_base/passages/forum-upload-thread.txt")),
    ("passages/forum-positive-thread.txt", include_str!("../../knowledge_base/passages/forum-positive-thread.txt")),
    ("passages/forum-grades-thread.txt", include_str!("../../knowledge_base/passages/forum-grades-thread.txt")),
    ("passages/forum-schedule-thread.txt", include_str!("../../knowledge_base/passages/forum-schedule-thread.txt")),
    ("passages/policy-late-submission.txt", include_str!("../../knowledge_base/passages/policy-late-submission.txt")),
    ("passages/policy-academic-integrity.txt", include_str!("../../knowledge_base/passages/policy-academic-integrity.txt")),
    ("passages/policy-census-date.txt", include_str!("../../knowledge_base/passages/policy-census-date.txt")),
    ("passages/policy-accessibility.txt", include_str!("../../knowledge_base/passages/policy-accessibility.txt")),
    ("passages/policy-support-escalation.txt", include_str!("../../knowledge_base/passages/policy-support-escalation.txt")),
    ("passages/policy-grade-appeals.txt", include_str!("../../knowledge_base/passages/policy-grade-appeals.txt")),
];
