import { Quiz, SubmitResponse } from "./types";

export interface QuizViewHooks {
  submit(quizId: string, responses: number[]): Promise<SubmitResponse>;
  feedback(quizId: string, vote: "Up" | "Down"): Promise<void>;
  regenerate(sectionId: string): void;
}

/**
 * Interactive quiz form. Answer explanations and pass/fail state stay hidden
 * until the learner submits; feedback and regenerate controls appear with the
 * result.
 */
export function renderQuiz(container: HTMLElement, quiz: Quiz, hooks: QuizViewHooks): void {
  const doc = container.ownerDocument;
  container.textContent = "";

  if (!quiz || !Array.isArray(quiz.questions) || quiz.questions.length === 0) {
    const fallback = doc.createElement("p");
    fallback.className = "sk-quiz-error";
    fallback.textContent = "This quiz arrived malformed. Try regenerating it.";
    container.appendChild(fallback);
    return;
  }

  const form = doc.createElement("form");
  form.className = "sk-quiz";
  form.dataset.quizId = quiz.quiz_id;

  quiz.questions.forEach((question, qIndex) => {
    const block = doc.createElement("fieldset");
    block.className = "sk-question";
    const legend = doc.createElement("legend");
    legend.textContent = `${qIndex + 1}. ${question.question}`;
    block.appendChild(legend);

    question.answers.forEach((answer, aIndex) => {
      const label = doc.createElement("label");
      label.className = "sk-answer";
      const radio = doc.createElement("input");
      radio.type = "radio";
      radio.name = `q${qIndex}`;
      radio.value = String(aIndex);
      label.appendChild(radio);
      label.appendChild(doc.createTextNode(" " + answer.text));
      block.appendChild(label);
    });
    form.appendChild(block);
  });

  const submit = doc.createElement("button");
  submit.type = "submit";
  submit.className = "sk-submit";
  submit.textContent = "Check my answers";
  form.appendChild(submit);

  const outcome = doc.createElement("div");
  outcome.className = "sk-outcome";
  form.appendChild(outcome);

  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const responses: number[] = [];
    for (let q = 0; q < quiz.questions.length; q++) {
      const chosen = form.querySelector<HTMLInputElement>(`input[name=q${q}]:checked`);
      if (!chosen) {
        outcome.textContent = "Answer every question first.";
        return;
      }
      responses.push(Number(chosen.value));
    }
    submit.disabled = true;
    try {
      const graded = await hooks.submit(quiz.quiz_id, responses);
      showResult(graded, responses);
    } catch (err) {
      submit.disabled = false;
      outcome.textContent = "Could not submit the quiz. The service may be offline.";
    }
  });

  function showResult(graded: SubmitResponse, responses: number[]): void {
    outcome.textContent = "";
    const verdict = doc.createElement("p");
    verdict.className = graded.result.passed ? "sk-pass" : "sk-fail";
    verdict.dataset.passed = String(graded.result.passed);
    const pct = Math.round(graded.result.score * 100);
    verdict.textContent = graded.result.passed
      ? `Passed, ${pct}% correct.`
      : `Not passed, ${pct}% correct.`;
    outcome.appendChild(verdict);

    graded.result.explanations.forEach((explanation, q) => {
      const note = doc.createElement("p");
      note.className = "sk-explanation";
      const ok = graded.result.correctness[q];
      note.textContent = `Q${q + 1} ${ok ? "correct" : "incorrect"}: ${explanation}`;
      outcome.appendChild(note);
    });

    const controls = doc.createElement("div");
    controls.className = "sk-feedback";
    controls.appendChild(feedbackButton("Up", "Helpful"));
    controls.appendChild(feedbackButton("Down", "Discard this quiz"));
    const again = doc.createElement("button");
    again.type = "button";
    again.className = "sk-regenerate";
    again.textContent = "New quiz";
    again.addEventListener("click", () => hooks.regenerate(quiz.section_id));
    controls.appendChild(again);
    outcome.appendChild(controls);
  }

  function feedbackButton(vote: "Up" | "Down", label: string): HTMLButtonElement {
    const button = doc.createElement("button");
    button.type = "button";
    button.className = `sk-vote-${vote.toLowerCase()}`;
    button.textContent = label;
    button.addEventListener("click", () => {
      button.disabled = true;
      hooks.feedback(quiz.quiz_id, vote).catch(() => {
        button.disabled = false;
      });
    });
    return button;
  }

  container.appendChild(form);
}
