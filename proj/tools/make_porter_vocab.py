#!/usr/bin/env python3
"""Regenerates data/porter_reference.tsv.

Stems a built-in English word sample with a table-driven implementation of
the classic Porter algorithm (the 1980 rule list, with the customary guard
that words of length <= 2 are left unchanged). The C++ stemmer in
src/porter_stemmer.cpp is written independently of this file; the unit tests
require bit-exact agreement with the TSV this script emits.

Usage: tools/make_porter_vocab.py [wordlist...] > data/porter_reference.tsv
Extra wordlist files (one word per line) are merged into the sample.
"""

import re
import sys
from pathlib import Path

VOWELS = "aeiou"
MIN_WORDS = 2000
MAX_WORDS = 3000


def is_consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in VOWELS:
        return False
    if c == "y":
        return True if i == 0 else not is_consonant(word, i - 1)
    return True


def measure(stem: str) -> int:
    """Number of VC sequences in [C](VC)^m[V]."""
    forms = "".join("c" if is_consonant(stem, i) else "v" for i in range(len(stem)))
    forms = re.sub("c+", "c", re.sub("v+", "v", forms))
    return forms.count("vc")


def contains_vowel(stem: str) -> bool:
    return any(not is_consonant(stem, i) for i in range(len(stem)))


def ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and is_consonant(word, len(word) - 1)


def ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        is_consonant(word, len(word) - 3)
        and not is_consonant(word, len(word) - 2)
        and is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def apply_rule_list(word, rules):
    """First matching suffix (rules in longest-match order) consumes the word
    for this step; the replacement only happens if the condition holds."""
    for suffix, replacement, condition in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if condition is None or condition(stem):
                return stem + replacement
            return word
    return word


def step1a(word):
    return apply_rule_list(
        word,
        [("sses", "ss", None), ("ies", "i", None), ("ss", "ss", None), ("s", "", None)],
    )


def step1b(word):
    if word.endswith("eed"):
        return word[:-1] if measure(word[:-3]) > 0 else word
    if word.endswith("ed") and contains_vowel(word[:-2]):
        word = word[:-2]
    elif word.endswith("ing") and contains_vowel(word[:-3]):
        word = word[:-3]
    else:
        return word
    # cleanup after a bare -ed / -ing removal
    if word.endswith(("at", "bl", "iz")):
        return word + "e"
    if ends_double_consonant(word) and word[-1] not in "lsz":
        return word[:-1]
    if measure(word) == 1 and ends_cvc(word):
        return word + "e"
    return word


def step1c(word):
    if word.endswith("y") and contains_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def m_pos(stem):
    return measure(stem) > 0


def m_gt1(stem):
    return measure(stem) > 1


STEP2_RULES = [
    ("ational", "ate", m_pos), ("tional", "tion", m_pos), ("enci", "ence", m_pos),
    ("anci", "ance", m_pos), ("izer", "ize", m_pos), ("abli", "able", m_pos),
    ("alli", "al", m_pos), ("entli", "ent", m_pos), ("eli", "e", m_pos),
    ("ousli", "ous", m_pos), ("ization", "ize", m_pos), ("ation", "ate", m_pos),
    ("ator", "ate", m_pos), ("alism", "al", m_pos), ("iveness", "ive", m_pos),
    ("fulness", "ful", m_pos), ("ousness", "ous", m_pos), ("aliti", "al", m_pos),
    ("iviti", "ive", m_pos), ("biliti", "ble", m_pos),
]

STEP3_RULES = [
    ("icate", "ic", m_pos), ("ative", "", m_pos), ("alize", "al", m_pos),
    ("iciti", "ic", m_pos), ("ical", "ic", m_pos), ("ful", "", m_pos),
    ("ness", "", m_pos),
]

STEP4_RULES = [
    ("ement", "", m_gt1), ("ance", "", m_gt1), ("ence", "", m_gt1),
    ("able", "", m_gt1), ("ible", "", m_gt1), ("ment", "", m_gt1),
    ("ent", "", m_gt1), ("ant", "", m_gt1), ("ism", "", m_gt1),
    ("ate", "", m_gt1), ("iti", "", m_gt1), ("ous", "", m_gt1),
    ("ive", "", m_gt1), ("ize", "", m_gt1),
    ("ion", "", lambda s: measure(s) > 1 and s[-1:] in ("s", "t")),
    ("al", "", m_gt1), ("er", "", m_gt1), ("ic", "", m_gt1), ("ou", "", m_gt1),
]


def step2(word):
    return apply_rule_list(word, STEP2_RULES)


def step3(word):
    return apply_rule_list(word, STEP3_RULES)


def step4(word):
    return apply_rule_list(word, STEP4_RULES)


def step5a(word):
    if word.endswith("e"):
        m = measure(word[:-1])
        if m > 1 or (m == 1 and not ends_cvc(word[:-1])):
            return word[:-1]
    return word


def step5b(word):
    if word.endswith("ll") and measure(word) > 1:
        return word[:-1]
    return word


def porter_stem(word: str) -> str:
    if len(word) <= 2:
        return word
    for step in (step1a, step1b, step1c, step2, step3, step4, step5a, step5b):
        word = step(word)
    return word


# Per-step example transformations published with the algorithm. Each entry
# checks the step function in isolation.
STEP_CHECKS = {
    step1a: {"caresses": "caress", "ponies": "poni", "ties": "ti",
             "caress": "caress", "cats": "cat"},
    step1b: {"feed": "feed", "agreed": "agree", "plastered": "plaster",
             "bled": "bled", "motoring": "motor", "sing": "sing",
             "conflated": "conflate", "troubled": "trouble", "sized": "size",
             "hopping": "hop", "tanned": "tan", "falling": "fall",
             "hissing": "hiss", "fizzed": "fizz", "failing": "fail",
             "filing": "file"},
    step1c: {"happy": "happi", "sky": "sky"},
    step2: {"relational": "relate", "conditional": "condition",
            "rational": "rational", "valenci": "valence",
            "hesitanci": "hesitance", "digitizer": "digitize",
            "conformabli": "conformable", "radicalli": "radical",
            "differentli": "different", "vileli": "vile",
            "analogousli": "analogous", "vietnamization": "vietnamize",
            "predication": "predicate", "operator": "operate",
            "feudalism": "feudal", "decisiveness": "decisive",
            "hopefulness": "hopeful", "callousness": "callous",
            "formaliti": "formal", "sensitiviti": "sensitive",
            "sensibiliti": "sensible"},
    step3: {"triplicate": "triplic", "formative": "form", "formalize": "formal",
            "electriciti": "electric", "electrical": "electric",
            "hopeful": "hope", "goodness": "good"},
    step4: {"revival": "reviv", "allowance": "allow", "inference": "infer",
            "airliner": "airlin", "gyroscopic": "gyroscop",
            "adjustable": "adjust", "defensible": "defens",
            "irritant": "irrit", "replacement": "replac",
            "adjustment": "adjust", "dependent": "depend", "adoption": "adopt",
            "homologou": "homolog", "communism": "commun",
            "activate": "activ", "angulariti": "angular",
            "homologous": "homolog", "effective": "effect",
            "bowdlerize": "bowdler"},
    step5a: {"probate": "probat", "rate": "rate", "cease": "ceas"},
    step5b: {"controll": "control", "roll": "roll"},
}

# End-to-end stems that are stable under the full step sequence.
KNOWN_PAIRS = {
    "caresses": "caress", "ponies": "poni", "ties": "ti", "cats": "cat",
    "feed": "feed", "bled": "bled", "motoring": "motor", "sing": "sing",
    "plastered": "plaster", "sized": "size", "hopping": "hop", "tanned": "tan",
    "falling": "fall", "hissing": "hiss", "fizzed": "fizz", "failing": "fail",
    "filing": "file", "happy": "happi", "sky": "sky", "probate": "probat",
    "rate": "rate", "cease": "ceas", "controll": "control", "roll": "roll",
    "generalizations": "gener", "oscillators": "oscil",
    "respect": "respect", "diverse": "divers", "inclusive": "inclus",
    "fair": "fair", "diversity": "divers", "respectful": "respect",
    "fairness": "fair", "inclusion": "inclus", "inclusiveness": "inclus",
}

BASE_WORDS = """
ability absence academy accept access accident account accuse achieve acid
acknowledge acquire act adapt add address adjust admire admit adopt advance
advantage adventure advise affair affect afford agency agent agree aim air
alarm allege allow ally amaze amount analyze anchor anger angle announce annoy
answer anticipate apologize appeal appear apply appoint appreciate approach
approve argue arise arm arrange arrest arrive art aspect assault assemble
assert assess assign assist associate assume assure atmosphere attach attack
attempt attend attract audit author authorize average avoid award balance band
bank bargain base battle bear beauty behave believe belong benefit bind blame
blend block board boast body boil bond border borrow bother bounce bound brain
branch brave break breathe bridge brief broad budget build burden burn burst
bury busy calculate call calm campaign cancel capture care carry carve cast
catch cause caution celebrate center chain challenge chance change charge charm
chart chase check cheer choose circle claim class clean clear climb close
cloud coach coast collect college combine comfort command comment commit
communicate community compare compete complain complete compose compute concern
conclude condition conduct confess confirm conflict confront confuse connect
consent consider consist constant construct consult consume contact contain
contest continue contract contrast contribute control convert convince cook
cool cooperate correct cost count counter courage cover crash create credit
crime critic cross crowd culture cure current curve custom damage dance danger
dare dark date deal debate decide declare decline decorate decrease dedicate
defend define degree delay deliver demand demonstrate deny depart depend
deposit depress derive describe deserve design desire destroy detail detect
determine develop device devote differ digest direct disagree disappear
discover discuss dismiss display dispute distance distinct distribute disturb
divide doubt draft drama dream dress drift drive drop earn ease educate effect
elect element embrace emerge employ enable encounter encourage end endure
engage enjoy enter entertain equal equip escape establish estimate evaluate
event evident examine exceed excel exchange excite exclude excuse execute
exercise exist expand expect experience experiment explain explore expose
express extend face fact fail faith fancy farm fashion fasten fault favor fear
feature feed feel fight figure fill film filter final finance find fine finish
fire firm fit fix flash float flood flow fold follow force forecast form
fortune found frame free frequent fresh front fuel function fund gain gather
gaze general generate gentle gesture glance glory govern grace grade grand
grant great greet ground group grow guard guess guide habit hand handle hang
happen harm haste hate head heal heart heat help hesitate hide hint hire hold
honor hope host house hunt hurry identify ignore illustrate image imagine
import impose impress improve include increase indicate infer inform inhabit
inherit initiate injure inquire insert insist inspect inspire install
institute instruct insult insure integrate intend interest interpret interview
introduce invent invest invite involve issue join judge jump justify keep key
kind knock labor lack land last late laugh launch lead lean learn lease leave
lecture legal lend level license lift light limit line link list listen live
load loan local locate lock lodge logic long look loose lose love lower loyal
magic mail main maintain major manage mark market marry master match mature
mean measure meet member mention merit middle might migrate mind mine minister
minor miss mix model moderate modern modify moment monitor mood moral motion
motivate mount move multiply name narrate narrow nation nature navigate neglect
negotiate nerve note notice number object oblige observe obtain occasion occupy
occur offend offer open operate oppose order organize origin outline overcome
own pace pack paint pair panic part pass patient pattern pause pay peace
perceive perfect perform permit persist person persuade phase phrase pick
picture piece pile pioneer place plan plant play plead please pledge point
policy polish popular port pose position possess post power practice praise
pray predict prefer prepare present preserve press pressure pretend prevail
prevent price pride prime print prison private prize probable proceed process
produce profess profit progress project promise promote prompt pronounce prove
provide provoke publish pull punish purchase pure purpose pursue push qualify
quality question quote race raise range rank rate reach react read reason
recall receive recognize recommend record recover reduce refer reflect reform
refuse regard region register regret regulate reject relate relax release
relieve rely remain remark remember remind remove render rent repair repeat
replace reply report represent request require rescue research reserve resign
resist resolve resort respect respond rest restore restrict result resume
retain retire retreat return reveal review revise revive reward rhythm ride
rise risk rival roam role root rough round route rule rush sacrifice sail
sample satisfy save scale scan scare schedule scheme school score scratch
scream screen seal search season seat secure seek seize select sense separate
serve settle shade shake shape share sharp shelter shift shine ship shock
shoot shop short shout show sign signal silence simple sing single sink sit
situate size sketch skill slide slip slow smooth social solve sort sound
source space spare speak special spell spend spirit split sponsor spot spread
spring stable staff stage stand start state station stay steady steal steer
step stick stimulate stir stock stop store storm story strain strange stream
strength stress stretch strike strip structure struggle study stuff subject
submit succeed suffer suggest suit supply support suppose surprise surround
survey survive suspect sustain swear sweep swing switch sympathy table tackle
take talk target task taste teach team tear tell tempt tend term test thank
theory threaten thrill throw tie time tip title tolerate tone top total touch
tour trace track trade train transfer transform translate transport travel
treat tremble trend trial tribute trick trouble trust try turn twist type
understand undertake unite urge use value vary venture verify view violate
visit voice vote wait wake walk wander want warm warn waste watch wave wealth
wear weigh welcome whisper wide will win wind wish wonder work worry worship
wound wrap write yield zone
""".split()

SUFFIXES = [
    "", "s", "es", "ed", "ing", "er", "ers", "ly", "ness", "ment", "ments",
    "ation", "ations", "ize", "ized", "izer", "ful", "fulness", "ity", "ities",
    "ous", "ously", "ive", "ively", "al", "ally", "able", "ible", "ance",
    "ence", "ant", "ent", "ism", "ist", "ists", "ate", "ated", "ian", "ional",
]


def build_sample(extra_files):
    words = set(KNOWN_PAIRS)
    for checks in STEP_CHECKS.values():
        words.update(checks)
    for base in BASE_WORDS:
        for suf in SUFFIXES:
            cand = base + suf
            if len(cand) <= 28:
                words.add(cand)
    for path in extra_files:
        for line in Path(path).read_text().splitlines():
            w = line.strip().lower()
            if w.isalpha():
                words.add(w)

    mandatory = set(KNOWN_PAIRS)
    for checks in STEP_CHECKS.values():
        mandatory.update(checks)
    pool = sorted(words - mandatory)
    if len(mandatory) + len(pool) > MAX_WORDS:
        stride = max(1, len(pool) // (MAX_WORDS - len(mandatory)))
        pool = pool[::stride][: MAX_WORDS - len(mandatory)]
    return sorted(mandatory | set(pool))


def main() -> int:
    failures = []
    for step, checks in STEP_CHECKS.items():
        for w, want in checks.items():
            got = step(w)
            if got != want:
                failures.append(f"{step.__name__}: {w} -> {got}, expected {want}")
    for w, want in KNOWN_PAIRS.items():
        got = porter_stem(w)
        if got != want:
            failures.append(f"full: {w} -> {got}, expected {want}")
    if failures:
        print("\n".join(failures), file=sys.stderr)
        return 1

    words = build_sample(sys.argv[1:])
    if len(words) < MIN_WORDS:
        print(f"only {len(words)} words in sample, need {MIN_WORDS}", file=sys.stderr)
        return 1
    for w in words:
        sys.stdout.write(f"{w}\t{porter_stem(w)}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
