// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/synthbench.hpp"

namespace omniemb {

// Precomputed Grassmannian line packing: 32 unit vectors in R^16 with
// pairwise |cosine| <= 0.195 (numerically optimized offline; the Welch
// lower bound for (16, 32) is ~0.1796). Topic prototypes are derived from
// these rows by seeded rotation, which preserves all pairwise angles.
const double kTopicPacking[32][16] = {
    {-0.098910778098827423, -0.28692303655709472, -0.28653525316987111, 0.10573073178607127, 0.52632861738236003, 0.050139704452960572, -0.39537714895329118, -0.047101459546151699, 0.17355175502706097, 0.29964343080472255, 0.052772390374047212, -0.30350125485033724, -0.17374936134535507, 0.33821421629338005, 0.044078988450853347, -0.1233205627577991},
    {-0.2092653296940685, -0.37388419346250645, -0.085589153194435968, -0.13119848296652811, -0.12866569525704721, 0.017826562950192665, -0.056691376160782438, -0.041578849354466076, 0.08278949151993939, 0.25519156441422991, -0.55874335786193763, -0.39979373221357034, -0.24283748524546359, -0.28920505450285838, -0.18433079228223412, 0.22242139007362677},
    {0.15195357147550764, 0.010983132395308046, 0.037873503139055083, -0.00060417347654568513, -0.0041747910386600732, -0.43168029962757803, 0.3852198478449001, -0.065386062370859838, 0.37858759015813598, 0.10271116044077874, -0.31578567244014877, 0.22868784987509183, -0.13520310903455357, -0.10976812846098366, 0.12966375470976682, -0.53224172690286942},
    {-0.06953110389571783, -0.07250365763222151, 0.42872767154714347, -0.17535193610947181, 0.33067242750834802, -0.24095482666501, -0.065091544812241553, -0.19306400719699426, 0.50475433819152771, 0.32984571349456071, 0.29014206925568453, 0.24621819265612332, 0.13591180388924873, 0.070030259966011948, -0.16679633590055434, 0.082828712938656512},
    {0.3499782463143245, -0.20869754423544584, 0.022595117013468467, 0.13022558042245408, 0.00047956082737392965, 0.10727137217126466, -0.22570801923353714, -0.071915334456632715, 0.049665281206333109, -0.074407369657472591, 0.24792255253863224, -0.44902351801077089, -0.37131102639922986, -0.41873637906047928, 0.3908229919584143, 0.10873162082325522},
    {-0.39193745739807323, -0.28701573069285352, 0.073645976995877327, -0.37618722353673906, -0.034681791078156859, 0.22718481690136555, -0.32415326821315948, 0.049458730143433847, -0.041085281530340342, -0.069053811222607689, 0.052980759529418782, 0.41764441946079073, 0.018670616716922668, -0.38284365530053427, -0.34661263400533776, -0.077335258616113858},
    {-0.30066431519288384, -0.045097636584799775, -0.1398353452338896, -0.044700212425166204, -0.29025423340794981, 0.00057883117927340312, 0.07652350646746077, -0.20580049640863574, 0.22174050702251863, 0.39492849516550227, 0.1369971903008653, -0.43977667366112849, 0.49486149668425811, 0.27484296313139261, -0.036339939308870924, 0.12042144945218848},
    {0.05482647641557889, 0.025980208177166012, -0.09785285016966197, -0.16008724002534527, 0.34989575216613134, 0.50329202414660601, 0.077178299157813796, 0.12877210336202788, 0.59458862935094059, -0.31228975294985184, 0.26336841692647045, 0.028994921410838283, -0.134975262139094, -0.090168096138539489, -0.01343426488346235, -0.12269513138828836},
    {-0.142257424478582, 0.086749401164736395, 0.28810197347714078, -0.063447226106229701, 0.19686053426534642, 0.051098088752975272, -0.10394691023190497, 0.51531124677221962, 0.34279264254748093, 0.14140367698138762, -0.10018565820552927, -0.34551827370741839, 0.10671344403086608, 0.018063529670833529, 0.35578777874896539, 0.402830622174564},
    {-0.066357930547502775, -0.30813876176520821, 0.33376166301231941, 0.41490053225034312, -0.37134088117725705, -0.029866648613549464, 0.16492176125988184, -0.12109934955959002, -0.20583800703538516, -0.36833452297125596, 0.36247782840927872, -0.28775255804664918, 0.055008173037195997, 0.18167573097097062, -0.017708124793643334, -0.088773069943948901},
    {0.29904070841270208, 0.56225040926436454, 0.030072144494534492, -0.078990986314482037, -0.31190822071115265, 0.3075036525350055, -0.21488206907021057, -0.052149382503316487, -0.2172201258314258, 0.25586766348328888, -0.065114443947010464, -0.13492245832374872, 0.22448943780481348, 0.083027779201365753, -0.32938324078298015, -0.21374489949636202},
    {-0.14308873896618199, 0.05240882112815419, -0.025829891798122773, 0.17897353007852565, 0.17399617142551368, 0.44453801664935089, 0.30661651844634141, 0.14140360210973171, -0.34261146498801842, 0.61298802960664145, -0.22262575440492177, -0.052067688248041102, -0.02255173862734337, 0.18501391799322128, 0.068974076937287937, 0.13143999146805085},
    {-0.2223161354733236, -0.23316213552311607, 0.11028150318379946, 0.47056620595795612, 0.13638587097901531, -0.1333124758973333, -0.5469198148359995, 0.20839063106295619, -0.1220620930421048, -0.2665027529362638, -0.25561991838050924, -0.13298931282193685, 0.18523513402191749, -0.27154136104494153, 0.039209100830859794, -0.071836190213310586},
    {0.013212415448390425, -0.055971303350502287, 0.32963220324746256, 0.40055463743606057, 0.39012777514793057, 0.17499716232776036, 0.43608742916706233, -0.01331953615393462, 0.12455893611473304, -0.18412894298939106, -0.13061176025481216, 0.064766182490040125, 0.51149434715312359, -0.092064328792119496, -0.026789589941601237, 0.1136900089982297},
    {-0.084743371015222099, 0.38476360888339162, -0.46675080514459372, -0.10905296110735661, 0.21963804723599029, -0.43207204010557471, -0.23842708341291008, 0.16399397019473066, -0.22197391959516372, -0.14148955769711549, 0.088012783655874338, -0.2940531525404213, 0.33587720428129969, 0.10604821263021749, -0.084441256201207029, -0.040777198146039487},
    {0.27505475613639835, 0.30423861321357798, 0.33572945644667285, 0.11863060695084861, 0.12570301536046186, -0.43767203688754069, -0.041842776811899539, 0.17162136370007772, 0.13429724087241651, -0.059832764411265768, -0.36273669647009055, -0.15547963051144995, -0.02326206526553554, -0.081932020903122058, -0.49850108827521267, 0.18250654321751217},
    {-0.028639322140759326, 0.33518713695306573, 0.34932592547779073, 0.24762971397439726, 0.028416436560954165, 0.16210081218641723, -0.073483386038782711, 0.1618563352241903, 0.089963403864056782, 0.20232260895004392, 0.41574669400591735, -0.16069550863545023, -0.55887543021191721, 0.23614064407152935, -0.16946279413742196, 0.016758444640493312},
    {-0.3700534580976293, 0.53097609700167958, 0.14489866681033378, -0.043674425474763953, 0.012360775758596796, 0.070758495828482454, -0.25305398237780957, 0.12811229557533801, -0.40291980010107803, 0.10987842110027814, 0.07315310551886392, 0.096815951399821687, -0.056652140664328353, -0.30800575356705712, 0.42606019654836247, -0.062180972251893847},
    {-0.15641416603418434, -0.061027220620088349, -0.043487079948929419, 0.46087274087098978, -0.20218572464123716, -0.064536805761079563, -0.20689923298303514, -0.0073769418187422543, 0.0038965186017621699, -0.074478057372149881, -0.1868504493487842, 0.37580743187179411, -0.32986473998114324, 0.5235454691995759, 0.24673759317003721, -0.21003136464835676},
    {-0.14865830975860125, -0.067057999539342716, 0.19735695405951947, 0.045279694849266978, 0.25986343016069907, 0.4050817495761489, -0.020706122055568574, -0.060417856613340384, -0.19012311312334898, -0.31838684034779358, -0.29398840655798936, -0.23366735440783498, -0.16898334665802747, 0.22329805224289209, -0.52265062996916312, -0.25802511495222236},
    {0.29930457401929961, 0.23222839534149153, 0.3291592369603295, -0.20963454507790713, 0.46611284153166432, 0.010982291337828408, -0.26295095564778803, -0.16306487833211714, 0.057677001405439708, -0.15173395463455219, -0.1993738221399545, -0.23645684835055272, 0.20922758242441047, -0.039626735116855515, 0.28659696184876315, -0.37627553431727334},
    {0.070093740422623785, 0.46031677914337948, -0.085241929066797173, 0.22386387986733519, 0.11290227023408318, 0.2603541013510195, 0.33072596505027174, -0.40277644171154364, 0.078842706582347252, 0.0020517800661520812, -0.23604098498719353, -0.11822686330808344, -0.3137472260613407, -0.43173490770484019, -0.11055624564515568, 0.026571501923768712},
    {0.07628771567829129, -0.35436789749418052, -0.14348854624250751, -0.12628526658330208, -0.18810226325004578, 0.088272838847718221, -0.10941767305944679, 0.13103303382452169, 0.055025929113113395, 0.034935088987709542, 0.062454391412699393, -0.39577391915252597, 0.16519984296123097, -0.20268105152960733, -0.13055273641229356, -0.71382752426660434},
    {-0.66225734323270091, 0.19110283545211157, -0.13049616231820285, 0.29573374926621693, 0.17615483147134428, 0.0087524359243179931, -0.12468056934404297, -0.40739994224639259, 0.16457511301330938, -0.26422297036564302, 0.2870231820264007, 0.061231683386777036, 0.028305642224785599, 0.037613750189591684, -0.14973839323716476, -0.010591020942923541},
    {-0.18586200851105064, -0.18204303406563288, 0.45226360651743641, -0.33632837757271455, 0.21695252454530811, 0.01311259714658362, 0.467246311667529, 0.20713767495371829, -0.34055446761550467, 0.011128653101314539, 0.1832436855476913, 0.061311876479859327, -0.018375458557556734, -0.023134446442000335, 0.093972465967676236, -0.37821787195236373},
    {0.36600719809384474, -0.10577396624635076, -0.60481858649352982, 0.20799943288221659, 0.42201408700182991, 0.109771851954567, 0.20738191802555897, -0.0039499947458013929, -0.18758336104984549, -0.0099058390557474202, 0.23279936215440442, 0.14036614675937173, 0.044550303125716395, -0.13249319470525106, 0.022145763259373764, 0.28878928082741556},
    {0.36030875970433024, -0.25061992722974674, 0.13772844389838243, 0.11604141605927712, 0.24482767037091335, 0.19968316841429198, -0.39692619334025336, -0.19005316303839606, -0.21169613108745391, 0.17608051085187007, -0.27450656045672006, 0.4301773720806647, 0.22965532118013701, 0.2121001232860108, -0.17736992485763925, 0.1266246859688665},
    {0.37384063984288052, -0.12828476624565632, 0.17921607557002511, 0.30119192798689209, -0.22009125994014495, 0.1526228485142799, -0.20468433709825112, 0.37655197774400534, 0.23345140066710579, 0.060103500242720653, 0.37967397644670475, 0.13943409897494496, 0.25111676233000302, -0.28446642797099009, -0.30112094313285265, 0.095757329826446733},
    {0.3503152808801393, -0.12690708619380484, 0.17529841997003776, -0.24059302178633599, 0.3220543938892092, -0.35919596825567163, -0.062929005224195436, -0.25692799001704286, -0.3783500299509025, -0.11645926648590446, 0.30995541357857109, -0.15945003301691804, -0.24513616462957449, 0.28911447744712787, -0.12884817437468749, 0.17708043263912226},
    {0.054357933338144614, 0.028591585985474764, 0.15384270079314383, 0.56597964208942841, 0.0094044598401047241, 0.045225980988418429, -0.12513625494775757, -0.38013538766694976, 0.0087202210769450755, 0.46111041005644643, 0.17463959210142968, 0.01729054522541728, 0.18182040480956957, -0.16250325446682054, 0.20937584555920302, -0.37832573444596318},
    {0.20937824455997334, 0.015398517192745854, 0.11726628347765684, -0.099015509083432832, -0.31923744096695822, 0.4423543940048888, -0.036207236650927684, -0.039185939290474883, 0.19737636173344295, -0.36770036852353671, -0.20136700112057035, -0.0064574369076081661, 0.33366639965835626, 0.45129397897792789, 0.29178277728738627, 0.13055137302829722},
    {0.014977471212180541, 0.076660607895284519, 0.18321808400106401, -0.33130390994208636, -0.22931455782649715, 0.084613748290847404, -0.25658163252534888, -0.7652200257510765, -0.063168481208745339, 0.060012207193425184, 0.028322685195316711, 0.039446837176774371, 0.079582429299987975, -0.18350931885393315, 0.17137102554200465, 0.24515340843893624},
};

}  // namespace omniemb
