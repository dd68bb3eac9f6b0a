/** The experiment form: three checkbox groups and a run button that stays
 * disabled until every group has at least one selection. */

export interface ChoiceItem {
  id: string;
  label: string;
}

export interface Selection {
  corpora: string[];
  geoparsers: string[];
  metrics: string[];
}

const GROUPS = ["corpora", "geoparsers", "metrics"] as const;
type GroupName = (typeof GROUPS)[number];

function checkedValues(root: HTMLElement, group: GroupName): string[] {
  const boxes = root.querySelectorAll<HTMLInputElement>(
    `input[type="checkbox"][data-group="${group}"]`,
  );
  return Array.from(boxes)
    .filter((box) => box.checked)
    .map((box) => box.value);
}

export function readSelection(root: HTMLElement): Selection {
  return {
    corpora: checkedValues(root, "corpora"),
    geoparsers: checkedValues(root, "geoparsers"),
    metrics: checkedValues(root, "metrics"),
  };
}

export function canSubmit(selection: Selection): boolean {
  return (
    selection.corpora.length > 0 &&
    selection.geoparsers.length > 0 &&
    selection.metrics.length > 0
  );
}

function buildGroup(
  doc: Document,
  group: GroupName,
  title: string,
  items: ChoiceItem[],
): HTMLFieldSetElement {
  const fieldset = doc.createElement("fieldset");
  fieldset.className = "choice-group";
  const legend = doc.createElement("legend");
  legend.textContent = title;
  fieldset.appendChild(legend);
  if (items.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "empty-group";
    empty.textContent = "nothing available yet";
    fieldset.appendChild(empty);
  }
  for (const item of items) {
    const label = doc.createElement("label");
    const box = doc.createElement("input");
    box.type = "checkbox";
    box.value = item.id;
    box.dataset.group = group;
    label.appendChild(box);
    label.appendChild(doc.createTextNode(` ${item.label}`));
    fieldset.appendChild(label);
  }
  return fieldset;
}

/** Render the form into `root` and wire selection tracking. Returns the
 * run button so callers can re-check its state in tests. */
export function setupForm(
  root: HTMLElement,
  choices: { corpora: ChoiceItem[]; geoparsers: ChoiceItem[]; metrics: ChoiceItem[] },
  onSubmit: (selection: Selection) => void,
): HTMLButtonElement {
  const doc = root.ownerDocument;
  root.textContent = "";
  root.appendChild(buildGroup(doc, "corpora", "1. Datasets", choices.corpora));
  root.appendChild(buildGroup(doc, "geoparsers", "2. Geoparsers", choices.geoparsers));
  root.appendChild(buildGroup(doc, "metrics", "3. Metrics", choices.metrics));

  const button = doc.createElement("button");
  button.type = "button";
  button.textContent = "Run experiment";
  button.disabled = true;
  root.appendChild(button);

  root.addEventListener("change", () => {
    button.disabled = !canSubmit(readSelection(root));
  });
  button.addEventListener("click", () => {
    const selection = readSelection(root);
    if (canSubmit(selection)) {
      onSubmit(selection);
    }
  });
  return button;
}
