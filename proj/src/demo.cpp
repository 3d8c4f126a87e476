#include "onestage/demo.hpp"

#include <array>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "onestage/unify.hpp"
#include "onestage/util.hpp"

namespace onestage {
namespace {

using Json = nlohmann::ordered_json;
using Rng = std::mt19937_64;
using Pool = std::vector<std::string>;

std::string format_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04zu", prefix, i);
  return buf;
}

const std::string& pick(Rng& gen, const Pool& pool) { return pool[gen() % pool.size()]; }

// Two distinct entries from the same pool.
std::pair<std::string, std::string> pick_two(Rng& gen, const Pool& pool) {
  std::size_t i = gen() % pool.size();
  std::size_t j = (i + 1 + gen() % (pool.size() - 1)) % pool.size();
  return {pool[i], pool[j]};
}

// --- Chinese clinical prose -------------------------------------------------

const Pool kZhSubjects = {"患者", "老年患者", "患儿", "术后患者", "门诊患者", "住院患者"};
const Pool kZhSymptoms = {"发热", "咳嗽", "头痛", "乏力", "腹泻", "胸闷", "咽痛", "恶心", "皮疹", "心悸"};
const Pool kZhExams = {"血常规", "尿常规", "胸部CT", "心电图", "肝功能", "血糖", "血压监测"};
const Pool kZhDrugs = {"阿莫西林", "布洛芬", "二甲双胍", "头孢类抗生素", "胰岛素", "止咳糖浆"};
const Pool kZhFindings = {"指标基本正常", "轻度异常", "白细胞计数升高", "未见明显异常"};
const Pool kZhConclusions = {"初步诊断为上呼吸道感染", "考虑病毒性感染可能",   "血压控制尚可",
                             "血糖波动仍然明显",       "预后良好，无需特殊处理", "需定期随访复查"};
const Pool kZhDurations = {"三天", "一周", "两周", "一个疗程"};

std::string number(Rng& gen, unsigned lo, unsigned hi) {
  return std::to_string(lo + gen() % (hi - lo + 1));
}

std::string zh_action(Rng& gen) {
  switch (gen() % 6) {
    case 0: return "建议完善" + pick(gen, kZhExams) + "检查";
    case 1: return "给予" + pick(gen, kZhDrugs) + number(gen, 1, 4) + "00毫克口服";
    case 2: return "将" + pick(gen, kZhDrugs) + "的剂量调整为每日" + number(gen, 1, 3) + "次";
    case 3: return "安排住院观察" + number(gen, 2, 9) + "天";
    case 4: return "嘱" + number(gen, 3, 14) + "天后门诊复查";
    default: return "开具" + pick(gen, kZhDrugs) + "处方";
  }
}

std::string zh_sentence(Rng& gen) {
  switch (gen() % 6) {
    case 0: {
      auto [a, b] = pick_two(gen, kZhSymptoms);
      return pick(gen, kZhSubjects) + number(gen, 18, 88) + "岁，" + a + "伴" + b +
             number(gen, 2, 9) + "天，" + zh_action(gen) + "。";
    }
    case 1:
      return pick(gen, kZhExams) + "显示" + pick(gen, kZhFindings) + "，" + pick(gen, kZhConclusions) + "。";
    case 2:
      return "医生为" + pick(gen, kZhSubjects) + zh_action(gen) + "，并叮嘱按时服药。";
    case 3:
      return "经过" + pick(gen, kZhDurations) + "的治疗，" + pick(gen, kZhSubjects) + "的" +
             pick(gen, kZhSymptoms) + "明显缓解。";
    case 4: {
      auto [a, b] = pick_two(gen, kZhSymptoms);
      return "随访第" + number(gen, 2, 30) + "天，" + a + "消退，仍有轻度" + b + "，" +
             zh_action(gen) + "。";
    }
    default:
      return pick(gen, kZhSubjects) + "的" + pick(gen, kZhExams) + "结果基本正常，" +
             pick(gen, kZhConclusions) + "。";
  }
}

std::string zh_doc(Rng& gen, std::size_t min_sentences, std::size_t max_sentences) {
  std::size_t n = min_sentences + gen() % (max_sentences - min_sentences + 1);
  std::string text;
  for (std::size_t k = 0; k < n; ++k) text += zh_sentence(gen);
  return text;
}

// --- English clinical prose -------------------------------------------------

const Pool kEnSubjects = {"The patient", "The elderly patient", "The child", "The outpatient"};
const Pool kEnSymptoms = {"fever",           "a persistent cough", "headache", "fatigue",
                          "abdominal pain", "chest tightness",    "nausea",   "a skin rash"};
const Pool kEnExams = {"a complete blood count", "a chest radiograph", "an electrocardiogram",
                       "liver function tests", "a fasting glucose test"};
const Pool kEnDrugs = {"amoxicillin", "ibuprofen", "metformin", "a cephalosporin antibiotic", "insulin"};
const Pool kEnConclusions = {
    "The working diagnosis was an upper respiratory infection.",
    "Blood pressure remained within the target range.",
    "The prognosis is favorable with continued treatment.",
    "The glucose readings call for a closer look at the insulin dosage.",
    "No further antibiotic therapy is needed at this time."};

std::string en_action(Rng& gen) {
  switch (gen() % 5) {
    case 0: return "ordered " + pick(gen, kEnExams);
    case 1: return "prescribed " + pick(gen, kEnDrugs) + " at " + number(gen, 1, 5) + "00 mg";
    case 2: return "recommended rest, fluids, and a check-in after " + number(gen, 2, 10) + " days";
    case 3: return "reduced the dosage to " + number(gen, 1, 3) + " doses per day";
    default: return "scheduled a follow-up visit at the clinic";
  }
}

std::string en_sentence(Rng& gen) {
  switch (gen() % 5) {
    case 0: {
      auto [a, b] = pick_two(gen, kEnSymptoms);
      return "A " + number(gen, 18, 88) + "-year-old patient presented with " + a + " and " + b +
             " for " + number(gen, 2, 9) + " days, so the physician " + en_action(gen) + ".";
    }
    case 1:
      return "Review of " + pick(gen, kEnExams) + " showed no acute abnormality. " +
             pick(gen, kEnConclusions);
    case 2:
      return "After " + number(gen, 3, 21) + " days of treatment the symptoms improved and the "
             "patient was advised to continue the current therapy.";
    case 3: {
      auto [a, b] = pick_two(gen, kEnSymptoms);
      return "On day " + number(gen, 2, 30) + " of follow-up " + a + " had resolved, though " + b +
             " persisted, and the physician " + en_action(gen) + ".";
    }
    default:
      return pick(gen, kEnSubjects) + " tolerated the treatment well, and the physician " +
             en_action(gen) + ".";
  }
}

std::string en_doc(Rng& gen, std::size_t min_sentences, std::size_t max_sentences) {
  std::size_t n = min_sentences + gen() % (max_sentences - min_sentences + 1);
  std::string text;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) text += ' ';
    text += en_sentence(gen);
  }
  return text;
}

// --- Literary prose with a light clinical flavor ------------------------------

const Pool kZhLitScene = {"雨夜里",     "黎明时分",   "深秋的傍晚",   "落雪的清晨", "梅雨季节",
                          "山风掠过的午后", "灯火初上的黄昏", "蝉声渐歇的夏夜", "春寒未退的早晨", "薄雾弥漫的渡口"};
const Pool kZhLitEvent = {
    "老医生背着药箱走过石桥",       "诊所的灯还亮着，病人的咳嗽声渐渐平息",
    "她数着病人的脉搏，像在听一条河", "药铺掌柜称出最后一包草药",
    "护士在走廊尽头安慰着病人的家属", "年轻大夫翻开了那本发黄的病历",
    "康复的孩子在窗台上留下一束野花", "他把处方笺折好放进衣兜",
    "候诊的老人望着墙上的挂钟出神",   "听诊器贴着胸口，心跳声像远处的鼓"};

const Pool kEnLitScene = {"At dusk",
                          "Before dawn",
                          "In the rainy season",
                          "On a snowbound morning",
                          "Late in the autumn",
                          "Under the first lamplight",
                          "After the last ferry",
                          "In the hush of midnight",
                          "When the fog lifted",
                          "Through the long afternoon"};
const Pool kEnLitEvent = {
    "the old doctor carried his worn stethoscope across the bridge",
    "the clinic lamp burned on while a patient's coughing eased",
    "she counted the pulse at the wrist as if listening to a river",
    "the apothecary weighed out the last packet of herbs",
    "a nurse comforted the family at the end of the corridor",
    "the young physician opened the yellowed casebook",
    "a recovered child left wildflowers on the ward windowsill",
    "he folded the prescription into his coat and met the snow",
    "the waiting room filled slowly with quiet coughing",
    "someone wound a clean bandage by candlelight"};

std::string literary_doc(Rng& gen, bool latin, std::size_t min_sentences,
                         std::size_t max_sentences) {
  std::size_t n = min_sentences + gen() % (max_sentences - min_sentences + 1);
  std::string text;
  for (std::size_t k = 0; k < n; ++k) {
    if (latin) {
      if (k > 0) text += ' ';
      text += pick(gen, kEnLitScene) + ", " + pick(gen, kEnLitEvent) + ".";
    } else {
      text += pick(gen, kZhLitScene) + "，" + pick(gen, kZhLitEvent) + "。";
    }
  }
  return text;
}

// --- Planted rejects ----------------------------------------------------------

std::string zh_ad_doc(Rng& gen) {
  std::string text = zh_sentence(gen) + zh_sentence(gen);
  for (int k = 0; k < 3; ++k) {
    text += "限时抢购进行中，点击链接领取优惠券！加微信咨询折扣价，免费领取试用装，立即下单还有秒杀惊喜。";
  }
  return text;
}

std::string en_ad_doc(Rng& gen) {
  std::string text = en_sentence(gen);
  for (int k = 0; k < 3; ++k) {
    text += " don't miss it: buy now, click here for a free trial, and subscribe today for a "
            "limited offer before the flash sale ends. order now, promo applies.";
  }
  return text;
}

std::string zh_punct_doc(Rng& gen) {
  return zh_sentence(gen) + "检查结果出来了！！！！真的吗？？？？快去看看吧！！！！" + zh_sentence(gen) +
         "太好了！！！！";
}

const char* zh_offtopic_doc() {
  return "今天天气晴朗，我们一家人去公园野餐。孩子们在草地上追逐风筝，笑声不断。"
         "傍晚回家的路上买了新鲜的水果和蔬菜。周末的时光总是过得飞快，大家约好下次去爬山。";
}

const char* en_offtopic_doc() {
  return "the weekend was sunny so we hiked along the river trail and watched the herons. "
         "we packed sandwiches and fresh fruit for a picnic by the old mill. "
         "the children flew kites in the meadow until sunset and fell asleep on the drive home.";
}

// --- File builders --------------------------------------------------------------

std::string doc_line(const std::string& id, const std::string& text, const std::string& title = "") {
  Json j;
  j["id"] = id;
  if (!title.empty()) j["title"] = title;
  j["text"] = text;
  return j.dump() + "\n";
}

// Web documents with planted rejects and duplicate pairs. Returns the raw
// texts so other files can plant cross-file duplicates.
std::vector<std::string> write_web_file(const std::filesystem::path& path, const char* prefix,
                                        bool zh, std::size_t count, Rng& gen) {
  std::vector<std::string> texts;
  texts.reserve(count);
  // Duplicate sources must themselves be clean documents.
  auto clean_index = [](std::size_t i) {
    switch (i % 25) {
      case 7: case 13: case 19: case 23: return i + 1;
      default: return i;
    }
  };
  std::string body;
  for (std::size_t i = 0; i < count; ++i) {
    std::string text;
    bool exact_dup = zh ? (i >= 40 && i < 50) : (i >= 30 && i < 38);
    bool near_dup = zh ? (i >= 90 && i < 98) : (i >= 60 && i < 66);
    if (exact_dup) {
      text = texts[clean_index(zh ? i - 40 : i - 30)];
    } else if (near_dup) {
      text = texts[clean_index(zh ? i - 90 : i - 60)];
      text += zh ? zh_sentence(gen) : " " + en_sentence(gen);
    } else {
      switch (i % 25) {
        case 7: text = zh ? "随访。" : "see notes."; break;
        case 13: text = zh ? zh_ad_doc(gen) : en_ad_doc(gen); break;
        case 19:
          text = zh ? zh_punct_doc(gen)
                    : en_sentence(gen) + " wow!!!! really???? unbelievable!!!! " + en_sentence(gen);
          break;
        case 23: text = zh ? zh_offtopic_doc() : en_offtopic_doc(); break;
        default: text = zh ? zh_doc(gen, 5, 9) : en_doc(gen, 5, 9); break;
      }
    }
    texts.push_back(text);
    body += doc_line(format_id(prefix, i), text);
  }
  atomic_write_file(path, body);
  return texts;
}

const Pool kZhTopics = {"糖尿病", "高血压", "流行性感冒", "肺炎",   "哮喘",
                        "贫血",   "胃炎",   "骨质疏松",   "偏头痛", "湿疹"};
const Pool kEnTopics = {"Diabetes mellitus", "Hypertension", "Influenza", "Pneumonia", "Asthma",
                        "Anemia",            "Gastritis",    "Osteoporosis", "Migraine", "Eczema"};

void write_ency_file(const std::filesystem::path& path, const char* prefix, bool zh,
                     std::size_t count, Rng& gen, const std::vector<std::string>* cross_dups) {
  std::string body;
  for (std::size_t i = 0; i < count; ++i) {
    std::string title = zh ? kZhTopics[i % kZhTopics.size()] : kEnTopics[i % kEnTopics.size()];
    std::string text;
    if (cross_dups && i >= 100 && i < 102) {
      text = (*cross_dups)[i];  // exact duplicate of a web document
    } else if (i % 30 == 11) {
      text = zh ? "见正文。" : "stub entry.";
    } else if (i % 30 == 25) {
      text = zh ? zh_offtopic_doc() : en_offtopic_doc();
    } else if (zh) {
      text = title + "是临床常见的疾病之一，起病方式多样。" + zh_doc(gen, 4, 7) + "治疗以" +
             pick(gen, kZhDrugs) + "为主，需结合" + pick(gen, kZhExams) + "结果定期复查。";
    } else {
      text = title + " is a common condition seen in clinical practice. " + en_doc(gen, 4, 7) +
             " Management usually combines " + pick(gen, kEnDrugs) + " with routine monitoring.";
    }
    body += doc_line(format_id(prefix, i), text, title);
  }
  atomic_write_file(path, body);
}

void write_lit_file(const std::filesystem::path& path, const char* prefix, bool zh,
                    std::size_t count, Rng& gen) {
  std::string body;
  for (std::size_t i = 0; i < count; ++i) {
    std::string text;
    if (zh && i % 20 == 9) {
      text = literary_doc(gen, false, 2, 2) + "好极了！！！！真的吗？？？？快看！！！！";
    } else if (!zh && i % 20 == 15) {
      text = "a short note.";
    } else {
      text = literary_doc(gen, !zh, 4, 8);
    }
    body += doc_line(format_id(prefix, i), text);
  }
  atomic_write_file(path, body);
}

void write_book(const std::filesystem::path& path, bool zh, Rng& gen) {
  std::string body;
  for (int p = 0; p < 24; ++p) {
    if (zh) {
      body += "第" + std::to_string(p + 1) + "节　" + zh_doc(gen, 2, 4);
    } else {
      body += "Section " + std::to_string(p + 1) + ". " + en_doc(gen, 2, 4);
    }
    body += "\n\n";
  }
  atomic_write_file(path, body);
}

// --- Native instruction pairs ------------------------------------------------

const Pool kZhQuestions = {
    "糖尿病患者在日常饮食中应注意什么？",
    "高血压患者如何在家正确测量血压？",
    "儿童发热时家长应该怎样处理？",
    "服用抗生素时有哪些注意事项？",
    "流感和普通感冒有什么区别？",
    "术后伤口护理需要注意哪些问题？",
    "体检报告中血糖偏高意味着什么？",
    "慢性胃炎患者的饮食应如何调整？",
    "哮喘患者在季节交替时如何预防发作？",
    "骨质疏松的老年人适合做哪些运动？",
    "长期服用降压药需要定期做哪些检查？",
    "皮疹持续不退应该去医院看哪个科室？"};

const Pool kZhAdvice = {
    "建议保持规律作息，避免过度劳累。",
    "饮食上宜清淡，控制糖分和盐分的摄入。",
    "应在医生指导下按剂量服药，切勿自行停药。",
    "若症状持续或加重，应及时到医院就诊。",
    "定期复查相关指标，便于医生调整治疗方案。",
    "适量运动有助于控制血糖和血压。",
    "服药期间避免饮酒，并注意观察不良反应。",
    "测量血压前应静坐五分钟，保持心情平稳。"};

void write_sft_pairs(const std::filesystem::path& path, Rng& gen) {
  std::string body;
  for (std::size_t i = 0; i < 120; ++i) {
    InstructionPair pair;
    pair.pair_id = format_id("sft", i);
    pair.instruction = kZhQuestions[i % kZhQuestions.size()];
    auto [a, b] = pick_two(gen, kZhAdvice);
    pair.output = a + b + pick(gen, kZhAdvice);
    // A handful of outputs carry content the ethics blocklist must catch.
    if (i == 17 || i == 101) pair.output += "如有疑问请拨打13912345678咨询。";
    if (i == 34) pair.output += "示例病历编号31010119900101123X，仅供参考。";
    if (i == 53) pair.output += "示例病历：患者身份证号110101198506154321。";
    if (i == 88) pair.output += "必要时可自行加倍剂量以求尽快见效。";
    pair.language = Language::zh;
    pair.genre = SourceKind::web;
    pair.provenance = Provenance::native_sft;
    body += pair_to_json_line(pair) + "\n";
  }
  atomic_write_file(path, body);
}

// --- Lexicons and blocklist ----------------------------------------------------

const char* kLexiconZh =
    "# domain lexicon: term<TAB>weight\n"
    "患者\t2.0\n症状\t1.5\n诊断\t2.0\n治疗\t1.5\n药物\t1.5\n检查\t1.2\n医生\t1.0\n手术\t1.5\n"
    "血压\t1.5\n血糖\t1.5\n糖尿病\t2.0\n感染\t1.5\n抗生素\t2.0\n剂量\t1.5\n处方\t1.5\n随访\t1.2\n"
    "复查\t1.2\n住院\t1.2\n病毒\t1.2\n胰岛素\t2.0\n心电图\t1.5\n肝功能\t1.5\n血常规\t1.5\n预后\t1.5\n"
    "医嘱\t1.2\n药箱\t1.0\n听诊器\t1.5\n病人\t1.2\n诊所\t1.2\n病房\t1.2\n病历\t1.2\n门诊\t1.2\n"
    "护士\t1.0\n药铺\t1.0\n脉搏\t1.2\n疾病\t1.2\n";

const char* kLexiconEn =
    "# domain lexicon: term<TAB>weight\n"
    "patient\t2.0\npatients\t2.0\nsymptom\t1.5\nsymptoms\t1.5\ndiagnosis\t2.0\ntreatment\t1.5\n"
    "physician\t1.5\ndosage\t1.5\nantibiotic\t2.0\ninfection\t1.5\ninsulin\t2.0\ndiabetes\t2.0\n"
    "prescription\t1.5\nglucose\t1.5\nradiograph\t1.5\nelectrocardiogram\t1.5\nprognosis\t1.5\n"
    "therapy\t1.2\nclinical\t1.2\nfever\t1.0\ncough\t1.0\ncoughing\t1.0\nclinic\t1.2\nnurse\t1.0\n"
    "stethoscope\t1.5\nward\t1.0\nbandage\t1.0\ncasebook\t1.0\namoxicillin\t1.5\nibuprofen\t1.5\n"
    "metformin\t1.5\ncephalosporin\t1.5\nhypertension\t2.0\ninfluenza\t1.5\npneumonia\t1.5\n"
    "asthma\t1.5\nanemia\t1.5\ngastritis\t1.5\nosteoporosis\t1.5\nmigraine\t1.5\neczema\t1.5\n"
    "apothecary\t1.0\nointment\t1.0\n";

const char* kAdsZh = "限时抢购\n点击链接\n优惠券\n加微信\n免费领取\n折扣价\n代理加盟\n立即下单\n扫码关注\n秒杀\n";
const char* kAdsEn =
    "buy now\nclick here\ndiscount code\nfree trial\nlimited offer\nsubscribe today\npromo\n"
    "order now\nflash sale\n";

const char* kBlocklist =
    "# safety blocklist: rule_id<TAB>pattern (applied to instruction and output)\n"
    "pii_national_id\t[0-9]{17}[0-9Xx]\n"
    "pii_phone\t1[35789][0-9]{9}\n"
    "unsafe_dosage\t自行加倍剂量\n";

// --- Exam, model outputs, judge records -----------------------------------------

struct McqTemplate {
  const char* question;
  std::array<const char*, 4> options;  // A..D
  char gold;
};

const std::array<McqTemplate, 8> kEnMcq = {{
    {"Which vitamin deficiency classically causes scurvy?",
     {"vitamin a", "vitamin b12", "vitamin c", "vitamin d"}, 'C'},
    {"Which organ produces insulin?", {"liver", "pancreas", "kidney", "spleen"}, 'B'},
    {"A resting adult heart rate of 72 beats per minute is best described as:",
     {"bradycardia", "tachycardia", "within the normal range", "an arrhythmia"}, 'C'},
    {"Which class of drugs treats bacterial infection?",
     {"antivirals", "antibiotics", "antihistamines", "antipyretics"}, 'B'},
    {"Hypertension refers to elevated:", {"blood sugar", "body temperature", "blood pressure", "heart rate"},
     'C'},
    {"Which test records the electrical activity of the heart?",
     {"electrocardiogram", "radiograph", "complete blood count", "liver panel"}, 'A'},
    {"Metformin is most commonly prescribed for:",
     {"type 2 diabetes", "asthma", "migraine", "eczema"}, 'A'},
    {"Which symptom most suggests an upper respiratory infection?",
     {"joint swelling", "sore throat and cough", "blurred vision", "ankle pain"}, 'B'},
}};

const std::array<McqTemplate, 8> kZhMcq = {{
    {"下列哪项检查用于评估血糖控制情况？", {"血常规", "糖化血红蛋白", "尿常规", "胸部CT"}, 'B'},
    {"高血压患者首选的家庭监测指标是？", {"体温", "血压", "心率", "体重"}, 'B'},
    {"肺炎最常见的致病微生物类型是？", {"真菌", "细菌", "寄生虫", "螨虫"}, 'B'},
    {"胰岛素由人体哪个器官分泌？", {"肝脏", "胰腺", "肾脏", "脾脏"}, 'B'},
    {"哮喘急性发作时应首先使用哪类药物？", {"口服抗生素", "吸入性支气管扩张剂", "维生素", "止泻药"}, 'B'},
    {"贫血患者最常见的症状是？", {"乏力", "皮疹", "耳鸣", "多汗"}, 'A'},
    {"骨质疏松的高危人群是？", {"青少年", "绝经后女性", "运动员", "儿童"}, 'B'},
    {"服用抗生素期间应避免的行为是？", {"多饮水", "按时服药", "自行停药", "清淡饮食"}, 'C'},
}};

std::string parseable_answer(char label, std::size_t variant) {
  switch (variant % 5) {
    case 0: return std::string("The answer is ") + label + ".";
    case 1: return std::string("答案是") + label + "。";
    case 2: return std::string(1, label) + ". see the reasoning above.";
    case 3: return std::string("(") + label + ") looks right to me.";
    default: return std::string("Answer: ") + label;
  }
}

const Pool kGarbageOutputs = {
    "the options all look plausible; more context would help.",
    "无法确定，题目给出的信息不足。",
    "this one needs more thought before committing to a letter.",
    "需要结合更多病史资料才能判断。"};

void write_exam_files(const std::filesystem::path& dir, Rng& gen) {
  std::string exam_body;
  std::string output_body;
  std::size_t item_index = 0;
  auto emit = [&](const char* benchmark, const char* prefix, const McqTemplate& tpl, std::size_t i) {
    Json j;
    std::string id = format_id(prefix, i);
    j["item_id"] = id;
    j["benchmark"] = benchmark;
    j["question"] = tpl.question;
    Json opts;
    const char* labels = "ABCD";
    for (std::size_t k = 0; k < tpl.options.size(); ++k) {
      opts[std::string(1, labels[k])] = tpl.options[k];
    }
    j["options"] = opts;
    j["gold"] = std::string(1, tpl.gold);
    exam_body += j.dump() + "\n";

    // Scripted outputs: mostly correct, some wrong, some unparseable, two
    // items left without any output at all.
    if (item_index == 5 || item_index == 29) {
      ++item_index;
      return;
    }
    std::string out;
    if (item_index % 5 < 3) {
      out = parseable_answer(tpl.gold, item_index);
    } else if (item_index % 5 == 3) {
      char wrong = static_cast<char>('A' + (tpl.gold - 'A' + 1) % 4);
      out = parseable_answer(wrong, item_index);
    } else {
      out = pick(gen, kGarbageOutputs);
    }
    Json o;
    o["item_id"] = id;
    o["output"] = out;
    output_body += o.dump() + "\n";
    ++item_index;
  };
  for (std::size_t i = 0; i < 22; ++i) emit("medqa_demo", "mq", kEnMcq[i % kEnMcq.size()], i);
  for (std::size_t i = 0; i < 18; ++i) emit("cmb_demo", "cmb", kZhMcq[i % kZhMcq.size()], i);
  atomic_write_file(dir / "exam.jsonl", exam_body);
  atomic_write_file(dir / "model_outputs.jsonl", output_body);
}

void write_judge_file(const std::filesystem::path& path, Rng& gen) {
  std::vector<std::string> verdicts;
  verdicts.insert(verdicts.end(), 58, "win");
  verdicts.insert(verdicts.end(), 27, "tie");
  verdicts.insert(verdicts.end(), 15, "fail");
  seeded_shuffle(verdicts, gen);
  std::string body;
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    Json j;
    j["question_id"] = format_id("jq", i);
    j["verdict"] = verdicts[i];
    body += j.dump() + "\n";
  }
  atomic_write_file(path, body);
}

const char* kDemoConfig = R"(# Demo pipeline configuration. All paths are relative to this file.

[paths]
workdir = work

[run]
target_language = zh
seed = 7
jobs = 2

[inputs]
zh_web = zh_web.jsonl|web|zh
en_web = en_web.jsonl|web|en
zh_ency = zh_ency.jsonl|encyclopedia|zh
en_ency = en_ency.jsonl|encyclopedia|en
zh_lit = zh_lit.jsonl|literature|zh
en_lit = en_lit.jsonl|literature|en
book_zh = book_zh.txt|book|zh
book_en = book_en.txt|book|en

[filter]
min_chars = 60
max_chars = 20000
max_punct_error_rate = 0.3
max_ad_density = 0.08
min_domain_score = 0.02
target_rate = 0.35
lexicon_zh = lexicon_zh.txt
lexicon_en = lexicon_en.txt
ads_zh = ads_zh.txt
ads_en = ads_en.txt

[dedup]
num_perms = 128
shingle_size = 5
bands = 32
rows = 4
threshold = 0.7

[unify]
max_chunk_chars = 320
ethics_rules = blocklist.txt
native_pairs = sft_pairs.jsonl

[rewriter]
mode = mock
model_id = mock
cache = true

[compile]
weight_transformed = 1.0
weight_native = 1.0
shard_size = 200

[train]
mode = one_stage
learning_rate = 0.05
batch_size = 4
total_steps = 150
window = 12
embed_dim = 24
hidden_dim = 48
max_example_tokens = 160

[eval]
exam = exam.jsonl
outputs = model_outputs.jsonl
judge = judge.jsonl
)";

}  // namespace

void write_demo_corpus(const std::filesystem::path& out_dir, std::uint64_t seed) {
  std::filesystem::create_directories(out_dir);

  Rng gen_zh_web = seeded_engine(seed, 1);
  auto zh_web_texts = write_web_file(out_dir / "zh_web.jsonl", "zhw", true, 300, gen_zh_web);
  Rng gen_en_web = seeded_engine(seed, 2);
  write_web_file(out_dir / "en_web.jsonl", "enw", false, 220, gen_en_web);

  Rng gen_zh_ency = seeded_engine(seed, 3);
  write_ency_file(out_dir / "zh_ency.jsonl", "zhe", true, 150, gen_zh_ency, &zh_web_texts);
  Rng gen_en_ency = seeded_engine(seed, 4);
  write_ency_file(out_dir / "en_ency.jsonl", "ene", false, 100, gen_en_ency, nullptr);

  Rng gen_zh_lit = seeded_engine(seed, 5);
  write_lit_file(out_dir / "zh_lit.jsonl", "zhl", true, 90, gen_zh_lit);
  Rng gen_en_lit = seeded_engine(seed, 6);
  write_lit_file(out_dir / "en_lit.jsonl", "enl", false, 80, gen_en_lit);

  Rng gen_book_zh = seeded_engine(seed, 7);
  write_book(out_dir / "book_zh.txt", true, gen_book_zh);
  Rng gen_book_en = seeded_engine(seed, 8);
  write_book(out_dir / "book_en.txt", false, gen_book_en);

  Rng gen_sft = seeded_engine(seed, 9);
  write_sft_pairs(out_dir / "sft_pairs.jsonl", gen_sft);

  atomic_write_file(out_dir / "lexicon_zh.txt", kLexiconZh);
  atomic_write_file(out_dir / "lexicon_en.txt", kLexiconEn);
  atomic_write_file(out_dir / "ads_zh.txt", kAdsZh);
  atomic_write_file(out_dir / "ads_en.txt", kAdsEn);
  atomic_write_file(out_dir / "blocklist.txt", kBlocklist);

  Rng gen_exam = seeded_engine(seed, 10);
  write_exam_files(out_dir, gen_exam);
  Rng gen_judge = seeded_engine(seed, 11);
  write_judge_file(out_dir / "judge.jsonl", gen_judge);

  atomic_write_file(out_dir / "demo.config", kDemoConfig);
}

}  // namespace onestage
