use super::{JobKind, RewriteJob};
use crate::qa::LETTERS;

/// Version tag of the rewrite prompt formats below; recorded in manifests.
pub const PROMPT_VERSION: &str = "rewrite-prompts-1";

/// System text sent with every rewrite request.
pub const REWRITE_SYSTEM: &str =
    "You rewrite questions into structured formats. Reply with a single JSON object and nothing else.";

/// System prompt for models answering the benchmark. Emitted into the dataset
/// manifest so evaluation uses the identical text.
pub const SYSTEM_PROMPT: &str = "You are an AI Assistant providing accurate, detailed, and polite explanations. Your goal is to give clear and helpful responses. Distances refer to convex hull distances, the shortest distance between points on the convex hulls of two objects, where a convex hull is the smallest convex shape enclosing an object. Volumes refer to the space within an object's minimum axis-aligned bounding box (AABB), a rectangular box aligned with the coordinate axes. Always use these definitions for distances and volumes.";

pub fn render_pm_prompt(job: &RewriteJob) -> String {
    let JobKind::PM { label, n_options } = &job.kind else {
        panic!("render_pm_prompt called with an FV job");
    };
    let n = *n_options;
    let sample: Vec<String> = LETTERS[..n.min(3)].iter().map(|l| format!("{l}) Option {l}")).collect();
    format!(
        r#"Please rewrite a Short Answer Question (SAQ) into a Prompt Matching (PM) format with {n} options.

Input
- Original SAQ: {saq}
- Original Answer: {answer}
- Expected Correct Option: {label}
- Number of Options: {n}

Task Description
1. Convert the SAQ into a clear and concise PM format.
2. Generate {d} incorrect options as distractors:
   - Keep distractors in the same category as the correct answer (e.g., if the answer is a noun, all distractors should be nouns).
   - Ensure distractors are plausible but incorrect.
   - Avoid synonyms, overly obvious wrong choices, or options that reveal the correct answer.
3. Place the correct answer exactly as specified (including any spelling variations) in the designated option label.
4. Format the options as follows:
   - "{sample} ..."
   - Ensure the correct answer appears at the predefined correct option label.
5. Include a hint instructing the user to answer using the correct option letter.

Output Format
Return only a JSON object with the following keys:
{{
  "question": "The rewritten PM",
  "Answer": "The correct option label (e.g., 'A')"
}}
Do not include any additional text or explanations outside this JSON object.

Example Formatting
Input:
- SAQ: "What is the capital of France?"
- Answer: "Parris" (note the misspelling)
- Expected Correct Option: "B"
- Number of Options: 4
Expected Output:
{{
  "question": "What is the capital of France? Answer using the correct option letter. A) Berlin  B) Parris  C) London  D) Rome",
  "Answer": "B"
}}
"#,
        saq = job.saq,
        answer = job.answer,
        d = n - 1,
        sample = sample.join("  "),
    )
}

pub fn render_fv_prompt(job: &RewriteJob) -> String {
    let JobKind::FV {
        indicator,
        affirmative: aff,
        negative: neg,
    } = &job.kind
    else {
        panic!("render_fv_prompt called with a PM job");
    };
    let indicator = if *indicator { "True" } else { "False" };
    format!(
        r#"Please rewrite a Short Answer Question (SAQ) into a Fact Validation (FV) format and also generate its contrapositive version.

Input
- Original SAQ: {saq}
- Original Answer: {answer}
- Boolean Indicator: {indicator}
- Answer Options: "{aff}" (for True) / "{neg}" (for False)

Task Description
1. Convert the SAQ into a clear, factual statement incorporating the given answer.
2. Rewrite the statement into a FV based on the Boolean Indicator:
   - If True -> Keep the statement affirmative (e.g., "Bob sits next to Alice.").
   - If False -> Negate the statement (e.g., "Bob does not sit next to Alice.").
3. Append the answer options at the end as:
   - "Is this correct? Answer with {aff} or {neg}."
4. Generate a contrapositive question by logically inverting the original statement and answer.
5. Ensure that both original and contrapositive questions are logically and grammatically correct.

Output Format
Return only a JSON object with the following keys:
{{
  "question": "The rewritten FV question",
  "Answer": "The answer option corresponding to the preset Boolean indicator",
  "cp_question": "The contrapositive version of the FV",
  "cp_answer": "The answer option corresponding to the negation of the preset Boolean indicator"
}}
Do not include any additional text or explanations outside this JSON object.

Example Formatting
Input:
- SAQ: "Who sits next to Alice?"
- Answer: "Bob"
- Boolean Indicator: False
- Answer Options: "{aff}" (True) / "{neg}" (False)
Expected Output:
{{
  "question": "Bob does not sit next to Alice. Is this correct? Answer with {aff} or {neg}.",
  "Answer": "{neg}",
  "cp_question": "Bob sits next to Alice. Is this correct? Answer with {aff} or {neg}.",
  "cp_answer": "{aff}"
}}
"#,
        saq = job.saq,
        answer = job.answer,
    )
}

/// Value of the first `- {key}: ` input line of a rendered prompt.
pub(crate) fn prompt_field<'a>(prompt: &'a str, key: &str) -> Option<&'a str> {
    let prefix = format!("- {key}: ");
    prompt.lines().find_map(|l| l.strip_prefix(prefix.as_str()))
}
